#include "srsgroup/positioning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "srsgroup/geometry.hpp"
#include "srsgroup/io.hpp"

namespace srsgroup {

void PositioningModelSpec::validate() const
{
    if (input_channels <= 0)
        throw std::invalid_argument("model spec: input_channels must be positive");
    for (const ConvSpec& c : conv_layers) {
        if (c.filters <= 0)
            throw std::invalid_argument("model spec: conv filters must be positive");
        if (c.kernel <= 0 || c.kernel % 2 == 0)
            throw std::invalid_argument("model spec: conv kernels must be odd");
    }
    if (dense_widths.empty())
        throw std::invalid_argument("model spec: need at least one dense width");
    for (int w : dense_widths)
        if (w <= 0)
            throw std::invalid_argument("model spec: dense widths must be positive");
}

Model build_model(const PositioningModelSpec& spec, int n_features, std::uint64_t seed)
{
    spec.validate();
    if (n_features <= 0 || n_features % spec.input_channels != 0)
        throw std::invalid_argument("build_model: feature count must split into channels");

    Model model;
    int width = n_features;
    if (spec.use_cnn) {
        const int length = n_features / spec.input_channels;
        int channels = spec.input_channels;
        for (const ConvSpec& c : spec.conv_layers) {
            model.add(std::make_unique<Conv1DLayer>(channels, c.filters, c.kernel, length));
            model.add(std::make_unique<ReluLayer>());
            channels = c.filters;
        }
        model.add(std::make_unique<FlattenLayer>());
        width = channels * length;
    }
    for (int w : spec.dense_widths) {
        model.add(std::make_unique<DenseLayer>(width, w));
        model.add(std::make_unique<ReluLayer>());
        width = w;
    }
    model.add(std::make_unique<DenseLayer>(width, spec.output_dim()));
    model.initialize(seed);
    return model;
}

void Scaler::fit(const Matrix& x)
{
    if (x.rows == 0)
        throw std::invalid_argument("scaler: cannot fit on an empty matrix");
    mean.assign(x.cols, 0.0);
    stdev.assign(x.cols, 0.0);
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < x.cols; ++c)
            mean[c] += x.at(r, c);
    for (int c = 0; c < x.cols; ++c)
        mean[c] /= x.rows;
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < x.cols; ++c) {
            const double d = x.at(r, c) - mean[c];
            stdev[c] += d * d;
        }
    for (int c = 0; c < x.cols; ++c) {
        stdev[c] = std::sqrt(stdev[c] / x.rows);
        if (stdev[c] < 1e-12)
            stdev[c] = 1.0;
    }
}

void Scaler::transform(Matrix& x) const
{
    if (static_cast<std::size_t>(x.cols) != mean.size())
        throw std::invalid_argument("scaler: column count mismatch");
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < x.cols; ++c)
            x.at(r, c) = (x.at(r, c) - mean[c]) / stdev[c];
}

Matrix snapshot_features(const std::vector<Snapshot>& snaps)
{
    if (snaps.empty())
        throw std::invalid_argument("snapshot_features: no snapshots");
    const int n_feat = static_cast<int>(snaps.front().features.size());
    Matrix x(static_cast<int>(snaps.size()), n_feat);
    for (std::size_t r = 0; r < snaps.size(); ++r) {
        if (static_cast<int>(snaps[r].features.size()) != n_feat)
            throw std::invalid_argument("snapshot_features: inhomogeneous feature counts");
        for (int c = 0; c < n_feat; ++c)
            x.at(static_cast<int>(r), c) = 20.0 * std::log10(snaps[r].features[c] + 1e-12);
    }
    return x;
}

TargetStats fit_target_stats(const std::vector<Snapshot>& snaps)
{
    if (snaps.empty())
        throw std::invalid_argument("fit_target_stats: no snapshots");
    TargetStats s;
    double mx = 0, my = 0;
    for (const Snapshot& snap : snaps) {
        mx += snap.x;
        my += snap.y;
    }
    mx /= snaps.size();
    my /= snaps.size();
    double vx = 0, vy = 0;
    for (const Snapshot& snap : snaps) {
        vx += (snap.x - mx) * (snap.x - mx);
        vy += (snap.y - my) * (snap.y - my);
    }
    s.x_mean = mx;
    s.y_mean = my;
    s.x_std = std::sqrt(vx / snaps.size());
    s.y_std = std::sqrt(vy / snaps.size());
    if (s.x_std < 1e-12)
        s.x_std = 1.0;
    if (s.y_std < 1e-12)
        s.y_std = 1.0;
    return s;
}

Matrix encode_targets(const std::vector<Snapshot>& snaps, const PositioningModelSpec& spec,
                      const TargetStats& stats)
{
    Matrix y(static_cast<int>(snaps.size()), spec.output_dim());
    for (std::size_t r = 0; r < snaps.size(); ++r) {
        const Snapshot& s = snaps[r];
        const int i = static_cast<int>(r);
        y.at(i, 0) = (s.x - stats.x_mean) / stats.x_std;
        y.at(i, 1) = (s.y - stats.y_mean) / stats.y_std;
        if (spec.heading == PositioningModelSpec::HeadingEncoding::SinCos) {
            y.at(i, 2) = std::sin(deg_to_rad(s.heading));
            y.at(i, 3) = std::cos(deg_to_rad(s.heading));
        } else {
            y.at(i, 2) = s.heading / 360.0;
        }
    }
    return y;
}

void split_chronological(const std::vector<Snapshot>& snaps, double test_fraction,
                         std::vector<Snapshot>& train, std::vector<Snapshot>& test)
{
    if (test_fraction < 0.0 || test_fraction >= 1.0)
        throw std::invalid_argument("split: test_fraction outside [0, 1)");

    std::vector<int> user_order;
    std::map<int, std::vector<Snapshot>> by_user;
    for (const Snapshot& s : snaps) {
        if (!by_user.count(s.user))
            user_order.push_back(s.user);
        by_user[s.user].push_back(s);
    }

    train.clear();
    test.clear();
    for (int user : user_order) {
        std::vector<Snapshot>& stream = by_user[user];
        std::stable_sort(stream.begin(), stream.end(),
                         [](const Snapshot& a, const Snapshot& b) { return a.t < b.t; });
        const std::size_t n_test =
            static_cast<std::size_t>(std::lround(stream.size() * test_fraction));
        const std::size_t n_train = stream.size() - n_test;
        train.insert(train.end(), stream.begin(), stream.begin() + n_train);
        test.insert(test.end(), stream.begin() + n_train, stream.end());
    }
}

Positioner train_positioner(const std::vector<Snapshot>& train_snaps,
                            const PositioningModelSpec& spec, const TrainOptions& opt,
                            std::vector<double>* losses)
{
    if (train_snaps.empty())
        throw std::invalid_argument("train_positioner: no training snapshots");

    Positioner pos;
    pos.spec = spec;
    pos.n_features = static_cast<int>(train_snaps.front().features.size());

    Matrix x = snapshot_features(train_snaps);
    pos.scaler.fit(x);
    pos.scaler.transform(x);
    pos.targets = fit_target_stats(train_snaps);
    Matrix y = encode_targets(train_snaps, spec, pos.targets);

    pos.model = build_model(spec, pos.n_features, opt.seed);
    std::vector<double> history = train_mse(pos.model, x, y, opt);
    if (losses)
        *losses = std::move(history);
    return pos;
}

void decode_prediction(const PositioningModelSpec& spec, const TargetStats& stats,
                       const double* outputs, PredictionRecord& rec)
{
    rec.x = outputs[0] * stats.x_std + stats.x_mean;
    rec.y = outputs[1] * stats.y_std + stats.y_mean;
    if (spec.heading == PositioningModelSpec::HeadingEncoding::SinCos)
        rec.heading = wrap_degrees(rad_to_deg(std::atan2(outputs[2], outputs[3])));
    else
        rec.heading = wrap_degrees(outputs[2] * 360.0);
}

std::vector<PredictionRecord> predict_batch(Positioner& pos, const std::vector<Snapshot>& snaps,
                                            bool parallel)
{
    std::vector<PredictionRecord> records(snaps.size());
    if (snaps.empty())
        return records;

    constexpr int kChunk = 256;
    const int n = static_cast<int>(snaps.size());
    const int n_chunks = (n + kChunk - 1) / kChunk;

    auto process = [&](Model& model, int chunk) {
        const int begin = chunk * kChunk;
        const int end = std::min(n, begin + kChunk);
        std::vector<Snapshot> slice(snaps.begin() + begin, snaps.begin() + end);
        Matrix x = snapshot_features(slice);
        pos.scaler.transform(x);
        const Matrix& out = model.forward(x);
        for (int i = begin; i < end; ++i) {
            PredictionRecord& rec = records[i];
            rec.t = snaps[i].t;
            rec.user = snaps[i].user;
            rec.x_true = snaps[i].x;
            rec.y_true = snaps[i].y;
            rec.heading_true = snaps[i].heading;
            rec.smoothed = false;
            decode_prediction(pos.spec, pos.targets, out.row(i - begin), rec);
        }
    };

    if (parallel) {
#pragma omp parallel
        {
            Model local = pos.model.clone();
#pragma omp for schedule(static)
            for (int c = 0; c < n_chunks; ++c)
                process(local, c);
        }
    } else {
        for (int c = 0; c < n_chunks; ++c)
            process(pos.model, c);
    }
    return records;
}

std::vector<PredictionRecord> smooth_predictions(const std::vector<PredictionRecord>& records)
{
    struct State {
        bool started = false;
        double x = 0, y = 0;
        double hx = 0, hy = 0; // unit heading vector
    };
    std::map<int, State> state;

    std::vector<PredictionRecord> out = records;
    std::stable_sort(out.begin(), out.end(), [](const PredictionRecord& a,
                                                const PredictionRecord& b) {
        return a.user != b.user ? a.user < b.user : a.t < b.t;
    });

    for (PredictionRecord& rec : out) {
        State& s = state[rec.user];
        const double hx = std::sin(deg_to_rad(rec.heading));
        const double hy = std::cos(deg_to_rad(rec.heading));
        if (!s.started) {
            s.started = true;
            s.x = rec.x;
            s.y = rec.y;
            s.hx = hx;
            s.hy = hy;
        } else {
            s.x = 0.5 * (rec.x + s.x);
            s.y = 0.5 * (rec.y + s.y);
            double ax = 0.5 * (hx + s.hx);
            double ay = 0.5 * (hy + s.hy);
            const double len = std::hypot(ax, ay);
            if (len > 1e-12) {
                s.hx = ax / len;
                s.hy = ay / len;
            }
            // antipodal pair: keep the previous direction
            rec.heading = wrap_degrees(rad_to_deg(std::atan2(s.hx, s.hy)));
            rec.x = s.x;
            rec.y = s.y;
        }
        rec.smoothed = true;
    }
    return out;
}

double heading_error(double pred_deg, double truth_deg)
{
    const double d = std::abs(wrap_degrees(pred_deg - truth_deg));
    return std::min(d, 360.0 - d);
}

void export_predictions_csv(const std::string& path, const std::vector<PredictionRecord>& records)
{
    CsvWriter w(path, {"t", "user", "x", "y", "heading", "x_true", "y_true", "heading_true",
                       "smoothed"});
    for (const PredictionRecord& r : records)
        w.write_row({format_double(r.t), std::to_string(r.user), format_double(r.x),
                     format_double(r.y), format_double(r.heading), format_double(r.x_true),
                     format_double(r.y_true), format_double(r.heading_true),
                     r.smoothed ? "1" : "0"});
}

std::vector<PredictionRecord> import_predictions_csv(const std::string& path)
{
    CsvTable table = read_csv(path);
    const int ct = table.column("t"), cu = table.column("user"), cx = table.column("x"),
              cy = table.column("y"), ch = table.column("heading"), ctx = table.column("x_true"),
              cty = table.column("y_true"), cth = table.column("heading_true"),
              cs = table.column("smoothed");
    if (ct < 0 || cu < 0 || cx < 0 || cy < 0 || ch < 0 || ctx < 0 || cty < 0 || cth < 0 || cs < 0)
        throw std::runtime_error("prediction csv missing columns: " + path);

    std::vector<PredictionRecord> records;
    records.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        PredictionRecord r;
        r.t = std::stod(row[ct]);
        r.user = std::stoi(row[cu]);
        r.x = std::stod(row[cx]);
        r.y = std::stod(row[cy]);
        r.heading = std::stod(row[ch]);
        r.x_true = std::stod(row[ctx]);
        r.y_true = std::stod(row[cty]);
        r.heading_true = std::stod(row[cth]);
        r.smoothed = row[cs] == "1";
        records.push_back(r);
    }
    return records;
}

void save_positioner(const std::string& path_prefix, Positioner& pos)
{
    save_model(path_prefix + "_net", pos.model);

    nlohmann::json conv = nlohmann::json::array();
    for (const ConvSpec& c : pos.spec.conv_layers)
        conv.push_back({{"filters", c.filters}, {"kernel", c.kernel}});
    nlohmann::json doc{
        {"format", "srsgroup-positioner-1"},
        {"n_features", pos.n_features},
        {"spec",
         {{"use_cnn", pos.spec.use_cnn},
          {"input_channels", pos.spec.input_channels},
          {"conv_layers", std::move(conv)},
          {"dense_widths", pos.spec.dense_widths},
          {"heading",
           pos.spec.heading == PositioningModelSpec::HeadingEncoding::SinCos ? "sincos"
                                                                             : "degrees"}}},
        {"scaler", {{"mean", pos.scaler.mean}, {"stdev", pos.scaler.stdev}}},
        {"targets",
         {{"x_mean", pos.targets.x_mean},
          {"x_std", pos.targets.x_std},
          {"y_mean", pos.targets.y_mean},
          {"y_std", pos.targets.y_std}}}};
    write_file(path_prefix + ".json", doc.dump(2) + "\n");
}

Positioner load_positioner(const std::string& path_prefix)
{
    const nlohmann::json doc = nlohmann::json::parse(read_file(path_prefix + ".json"));
    if (doc.at("format").get<std::string>() != "srsgroup-positioner-1")
        throw std::runtime_error("load_positioner: unknown format in " + path_prefix + ".json");

    Positioner pos;
    const auto& spec = doc.at("spec");
    pos.spec.use_cnn = spec.at("use_cnn").get<bool>();
    pos.spec.input_channels = spec.at("input_channels").get<int>();
    pos.spec.conv_layers.clear();
    for (const auto& c : spec.at("conv_layers"))
        pos.spec.conv_layers.push_back({c.at("filters").get<int>(), c.at("kernel").get<int>()});
    pos.spec.dense_widths = spec.at("dense_widths").get<std::vector<int>>();
    pos.spec.heading = spec.at("heading").get<std::string>() == "degrees"
                           ? PositioningModelSpec::HeadingEncoding::Degrees
                           : PositioningModelSpec::HeadingEncoding::SinCos;
    pos.n_features = doc.at("n_features").get<int>();
    pos.scaler.mean = doc.at("scaler").at("mean").get<std::vector<double>>();
    pos.scaler.stdev = doc.at("scaler").at("stdev").get<std::vector<double>>();
    pos.targets.x_mean = doc.at("targets").at("x_mean").get<double>();
    pos.targets.x_std = doc.at("targets").at("x_std").get<double>();
    pos.targets.y_mean = doc.at("targets").at("y_mean").get<double>();
    pos.targets.y_std = doc.at("targets").at("y_std").get<double>();

    pos.model = load_model(path_prefix + "_net");
    return pos;
}

} // namespace srsgroup
