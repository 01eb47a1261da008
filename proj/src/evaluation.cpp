#include "srsgroup/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "srsgroup/rng.hpp"
#include "srsgroup/srs.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace srsgroup {

using nlohmann::json;

namespace {

const char* heading_encoding_name(PositioningModelSpec::HeadingEncoding h)
{
    return h == PositioningModelSpec::HeadingEncoding::SinCos ? "sincos" : "degrees";
}

PositioningModelSpec::HeadingEncoding heading_encoding_from_name(const std::string& name)
{
    if (name == "sincos")
        return PositioningModelSpec::HeadingEncoding::SinCos;
    if (name == "degrees")
        return PositioningModelSpec::HeadingEncoding::Degrees;
    throw std::invalid_argument("unknown heading encoding: " + name);
}

json scene_to_json(const ScenarioConfig& s)
{
    json j;
    j["scenario"] = scenario_name(s.scenario);
    j["bs_position"] = {s.bs_position.x, s.bs_position.y, s.bs_position.z};
    j["path_height"] = s.path_height;
    json wp = json::array();
    for (const auto& w : s.lap_waypoints)
        wp.push_back({w.x, w.y});
    j["lap_waypoints"] = wp;
    j["speed"] = s.speed;
    j["sample_interval"] = s.sample_interval;
    j["jitter_amplitude"] = s.jitter_amplitude;
    j["corner_radius"] = s.corner_radius;
    json sc = json::array();
    for (const auto& p : s.scatterers)
        sc.push_back({p.x, p.y, p.z});
    j["scatterers"] = sc;
    j["ue_directivity"] = s.ue_directivity;
    j["rng_seed"] = s.rng_seed;
    return j;
}

ScenarioConfig scene_from_json(const json& j)
{
    ScenarioConfig s;
    s.scenario = scenario_from_name(j.at("scenario").get<std::string>());
    auto bs = j.at("bs_position");
    s.bs_position = {bs.at(0).get<double>(), bs.at(1).get<double>(), bs.at(2).get<double>()};
    s.path_height = j.at("path_height").get<double>();
    s.lap_waypoints.clear();
    for (const auto& w : j.at("lap_waypoints"))
        s.lap_waypoints.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
    s.speed = j.at("speed").get<double>();
    s.sample_interval = j.at("sample_interval").get<double>();
    s.jitter_amplitude = j.at("jitter_amplitude").get<double>();
    s.corner_radius = j.at("corner_radius").get<double>();
    s.scatterers.clear();
    for (const auto& p : j.at("scatterers"))
        s.scatterers.push_back(
            {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    s.ue_directivity = j.at("ue_directivity").get<double>();
    s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return s;
}

json array_to_json(const ArrayConfig& a)
{
    json j;
    j["n_beams_h"] = a.n_beams_h;
    j["n_beams_v"] = a.n_beams_v;
    j["elements_per_pol"] = a.elements_per_pol;
    j["element_spacing"] = a.element_spacing;
    j["carrier_frequency"] = a.carrier_frequency;
    j["bandwidth"] = a.bandwidth;
    j["ue_layers"] = a.ue_layers;
    j["panel_cols"] = a.panel_cols;
    return j;
}

ArrayConfig array_from_json(const json& j)
{
    ArrayConfig a;
    a.n_beams_h = j.at("n_beams_h").get<int>();
    a.n_beams_v = j.at("n_beams_v").get<int>();
    a.elements_per_pol = j.at("elements_per_pol").get<int>();
    a.element_spacing = j.at("element_spacing").get<double>();
    a.carrier_frequency = j.at("carrier_frequency").get<double>();
    a.bandwidth = j.at("bandwidth").get<double>();
    a.ue_layers = j.at("ue_layers").get<int>();
    a.panel_cols = j.at("panel_cols").get<int>();
    return a;
}

json model_to_json(const PositioningModelSpec& m)
{
    json j;
    j["use_cnn"] = m.use_cnn;
    j["input_channels"] = m.input_channels;
    json conv = json::array();
    for (const auto& c : m.conv_layers)
        conv.push_back({c.filters, c.kernel});
    j["conv_layers"] = conv;
    j["dense_widths"] = m.dense_widths;
    j["heading"] = heading_encoding_name(m.heading);
    return j;
}

PositioningModelSpec model_from_json(const json& j)
{
    PositioningModelSpec m;
    m.use_cnn = j.at("use_cnn").get<bool>();
    m.input_channels = j.at("input_channels").get<int>();
    m.conv_layers.clear();
    for (const auto& c : j.at("conv_layers"))
        m.conv_layers.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
    m.dense_widths = j.at("dense_widths").get<std::vector<int>>();
    m.heading = heading_encoding_from_name(j.at("heading").get<std::string>());
    return m;
}

json cluster_to_json(const ClusterParams& p)
{
    json j;
    j["method"] = cluster_method_name(p.method);
    j["eps"] = p.eps;
    j["min_pts"] = p.min_pts;
    j["distance_threshold"] = p.distance_threshold;
    return j;
}

ClusterParams cluster_from_json(const json& j)
{
    ClusterParams p;
    p.method = cluster_method_from_name(j.at("method").get<std::string>());
    p.eps = j.at("eps").get<double>();
    p.min_pts = j.at("min_pts").get<int>();
    p.distance_threshold = j.at("distance_threshold").get<double>();
    return p;
}

json norm_to_json(const NormalizationConfig& n)
{
    json j;
    j["min_x"] = n.min_x;
    j["max_x"] = n.max_x;
    j["min_y"] = n.min_y;
    j["max_y"] = n.max_y;
    j["per_instant"] = n.per_instant;
    j["heading_weight"] = n.heading_weight;
    j["mode"] = feature_mode_name(n.mode);
    return j;
}

NormalizationConfig norm_from_json(const json& j)
{
    NormalizationConfig n;
    n.min_x = j.at("min_x").get<double>();
    n.max_x = j.at("max_x").get<double>();
    n.min_y = j.at("min_y").get<double>();
    n.max_y = j.at("max_y").get<double>();
    n.per_instant = j.at("per_instant").get<bool>();
    n.heading_weight = j.at("heading_weight").get<double>();
    n.mode = feature_mode_from_name(j.at("mode").get<std::string>());
    return n;
}

std::string hash_hex(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

template <typename F> auto run_stage(const char* stage, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(stage) + ": " + e.what());
    }
}

} // namespace

void ExperimentConfig::validate() const
{
    scene.validate();
    array.validate();
    model.validate();
    if (patterns.empty())
        throw std::invalid_argument("experiment: no lap patterns");
    if (!(snr_db > -100.0 && snr_db < 300.0))
        throw std::invalid_argument("experiment: snr_db out of range");
    if (!(p_miss >= 0.0 && p_miss <= 1.0))
        throw std::invalid_argument("experiment: p_miss must be in [0, 1]");
    if (downsample_stride < 1)
        throw std::invalid_argument("experiment: downsample_stride must be positive");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("experiment: test_fraction must be in (0, 1)");
    if (train.epochs < 1 || train.batch_size < 1 || !(train.learning_rate > 0.0))
        throw std::invalid_argument("experiment: bad training options");
    for (const auto& p : clustering)
        p.validate();
    if (!(normalization.heading_weight >= 0.0))
        throw std::invalid_argument("experiment: heading_weight must be non-negative");
}

ExperimentConfig default_experiment(Scenario s)
{
    ExperimentConfig cfg;
    cfg.name = s == Scenario::LoS ? "desk_los" : "desk_nlos";
    cfg.scene = default_scenario(s);
    cfg.train.epochs = 50;

    double min_x = cfg.scene.lap_waypoints.front().x, max_x = min_x;
    double min_y = cfg.scene.lap_waypoints.front().y, max_y = min_y;
    for (const auto& w : cfg.scene.lap_waypoints) {
        min_x = std::min(min_x, w.x);
        max_x = std::max(max_x, w.x);
        min_y = std::min(min_y, w.y);
        max_y = std::max(max_y, w.y);
    }
    cfg.normalization.min_x = min_x;
    cfg.normalization.max_x = max_x;
    cfg.normalization.min_y = min_y;
    cfg.normalization.max_y = max_y;

    for (double radius : {0.5, 0.6}) {
        ClusterParams d;
        d.method = ClusterMethod::DBSCAN;
        d.eps = radius;
        cfg.clustering.push_back(d);
        ClusterParams h;
        h.method = ClusterMethod::Hierarchical;
        h.distance_threshold = radius;
        cfg.clustering.push_back(h);
    }
    return cfg;
}

void apply_profile(ExperimentConfig& cfg, std::string_view profile)
{
    if (profile == "desk")
        cfg.train.epochs = 50;
    else if (profile == "full")
        cfg.train.epochs = 200;
    else
        throw std::invalid_argument("unknown profile: " + std::string(profile));
}

std::string experiment_config_to_json(const ExperimentConfig& cfg)
{
    json j;
    j["name"] = cfg.name;
    j["scene"] = scene_to_json(cfg.scene);
    j["array"] = array_to_json(cfg.array);
    json pats = json::array();
    for (Pattern p : cfg.patterns)
        pats.push_back(pattern_name(p));
    j["patterns"] = pats;
    j["snr_db"] = cfg.snr_db;
    j["p_miss"] = cfg.p_miss;
    j["downsample_stride"] = cfg.downsample_stride;
    j["model"] = model_to_json(cfg.model);
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate}};
    j["test_fraction"] = cfg.test_fraction;
    j["normalization"] = norm_to_json(cfg.normalization);
    json cl = json::array();
    for (const auto& p : cfg.clustering)
        cl.push_back(cluster_to_json(p));
    j["clustering"] = cl;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& text)
{
    json j = json::parse(text);
    ExperimentConfig cfg;
    cfg.name = j.at("name").get<std::string>();
    cfg.scene = scene_from_json(j.at("scene"));
    cfg.array = array_from_json(j.at("array"));
    cfg.patterns.clear();
    for (const auto& p : j.at("patterns"))
        cfg.patterns.push_back(pattern_from_name(p.get<std::string>()));
    cfg.snr_db = j.at("snr_db").get<double>();
    cfg.p_miss = j.at("p_miss").get<double>();
    cfg.downsample_stride = j.at("downsample_stride").get<int>();
    cfg.model = model_from_json(j.at("model"));
    cfg.train.epochs = j.at("train").at("epochs").get<int>();
    cfg.train.batch_size = j.at("train").at("batch_size").get<int>();
    cfg.train.learning_rate = j.at("train").at("learning_rate").get<double>();
    cfg.test_fraction = j.at("test_fraction").get<double>();
    cfg.normalization = norm_from_json(j.at("normalization"));
    cfg.clustering.clear();
    for (const auto& p : j.at("clustering"))
        cfg.clustering.push_back(cluster_from_json(p));
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

void save_experiment_config(const std::string& path, const ExperimentConfig& cfg)
{
    write_file(path, experiment_config_to_json(cfg));
}

ExperimentConfig load_experiment_config(const std::string& path)
{
    return experiment_config_from_json(read_file(path));
}

std::uint64_t config_hash(const ExperimentConfig& cfg)
{
    return fnv1a64(experiment_config_to_json(cfg));
}

MetricsReport compute_metrics(const std::vector<PredictionRecord>& records)
{
    if (records.empty())
        throw std::invalid_argument("compute_metrics: no records");

    MetricsReport rep;
    rep.n = static_cast<int>(records.size());
    const double n = static_cast<double>(records.size());

    double ss_x = 0, ss_y = 0, ss_h = 0;
    double mean_x = 0, mean_y = 0, mean_h = 0;
    for (const auto& r : records) {
        const double ex = r.x - r.x_true;
        const double ey = r.y - r.y_true;
        const double eh = heading_error(r.heading, r.heading_true);
        ss_x += ex * ex;
        ss_y += ey * ey;
        ss_h += eh * eh;
        mean_x += r.x_true;
        mean_y += r.y_true;
        mean_h += r.heading_true;
    }
    mean_x /= n;
    mean_y /= n;
    mean_h /= n;
    rep.rmse_x = std::sqrt(ss_x / n);
    rep.rmse_y = std::sqrt(ss_y / n);
    rep.rmse_dist = std::sqrt((ss_x + ss_y) / n);
    rep.rmse_heading = std::sqrt(ss_h / n);

    double tot_x = 0, tot_y = 0, tot_h = 0;
    for (const auto& r : records) {
        tot_x += (r.x_true - mean_x) * (r.x_true - mean_x);
        tot_y += (r.y_true - mean_y) * (r.y_true - mean_y);
        tot_h += (r.heading_true - mean_h) * (r.heading_true - mean_h);
    }
    rep.r2_x_valid = tot_x > 0.0;
    rep.r2_y_valid = tot_y > 0.0;
    rep.r2_heading_valid = tot_h > 0.0;
    if (rep.r2_x_valid)
        rep.r2_x = 1.0 - ss_x / tot_x;
    if (rep.r2_y_valid)
        rep.r2_y = 1.0 - ss_y / tot_y;
    if (rep.r2_heading_valid)
        rep.r2_heading = 1.0 - ss_h / tot_h;
    return rep;
}

std::vector<MetricsReport> metrics_by_pattern(const std::vector<PredictionRecord>& records,
                                              const std::vector<Pattern>& patterns)
{
    std::vector<MetricsReport> out;
    for (std::size_t k = 0; k < patterns.size(); ++k) {
        std::vector<PredictionRecord> group;
        for (const auto& r : records)
            if (r.user / 2 == static_cast<int>(k))
                group.push_back(r);
        if (group.empty())
            continue;
        MetricsReport rep = compute_metrics(group);
        rep.label = pattern_name(patterns[k]);
        out.push_back(rep);
    }
    MetricsReport all = compute_metrics(records);
    all.label = "all";
    out.push_back(all);
    return out;
}

static const std::vector<std::string> kMetricsHeader = {
    "scenario", "variant", "pattern", "n",    "rmse_x", "rmse_y",
    "rmse_dist", "rmse_heading", "r2_x", "r2_y", "r2_heading"};

void append_metrics_csv(CsvWriter& out, const std::string& scenario, const std::string& variant,
                        const std::vector<MetricsReport>& reports)
{
    for (const auto& r : reports) {
        auto r2 = [](bool valid, double v) { return valid ? format_double(v) : std::string("na"); };
        out.write_row({scenario, variant, r.label, std::to_string(r.n), format_double(r.rmse_x),
                       format_double(r.rmse_y), format_double(r.rmse_dist),
                       format_double(r.rmse_heading), r2(r.r2_x_valid, r.r2_x),
                       r2(r.r2_y_valid, r.r2_y), r2(r.r2_heading_valid, r.r2_heading)});
    }
}

void export_metrics_csv(const std::string& path, const std::string& scenario,
                        const std::string& variant, const std::vector<MetricsReport>& reports)
{
    CsvWriter out(path, kMetricsHeader);
    append_metrics_csv(out, scenario, variant, reports);
}

void export_cdf(const std::string& path, std::vector<double> errors)
{
    if (errors.empty())
        throw std::invalid_argument("export_cdf: no errors");
    std::sort(errors.begin(), errors.end());
    CsvWriter out(path, {"error", "probability"});
    const double n = static_cast<double>(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i)
        out.write_row({format_double(errors[i]), format_double((i + 1.0) / n)});
}

std::vector<double> position_errors(const std::vector<PredictionRecord>& records)
{
    std::vector<double> e;
    e.reserve(records.size());
    for (const auto& r : records)
        e.push_back(std::hypot(r.x - r.x_true, r.y - r.y_true));
    return e;
}

std::vector<double> heading_errors(const std::vector<PredictionRecord>& records)
{
    std::vector<double> e;
    e.reserve(records.size());
    for (const auto& r : records)
        e.push_back(heading_error(r.heading, r.heading_true));
    return e;
}

std::vector<UserTrack> stage_simulate(const ExperimentConfig& cfg)
{
    ScenarioConfig scene = cfg.scene;
    scene.rng_seed = cfg.seed;
    std::vector<Lap> laps;
    laps.reserve(cfg.patterns.size());
    for (Pattern p : cfg.patterns)
        laps.push_back(generate_trajectory(scene, p));
    return split_virtual_users(laps);
}

std::vector<Snapshot> stage_preprocess(const ExperimentConfig& cfg,
                                       const std::vector<UserTrack>& tracks, bool parallel)
{
    ScenarioConfig scene = cfg.scene;
    scene.rng_seed = cfg.seed;
    const auto freqs = prb_center_frequencies(cfg.array);
    const int n_tracks = static_cast<int>(tracks.size());
    std::vector<std::vector<Snapshot>> per_track(n_tracks);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int ti = 0; ti < n_tracks; ++ti) {
        const UserTrack& track = tracks[ti];
        auto mask_rng = make_rng(cfg.seed, rng_stream::mask, track.user);
        auto noise_rng = make_rng(cfg.seed, rng_stream::noise, track.user);
        const int rows = cfg.array.ue_layers * (cfg.array.n_beams_h + cfg.array.n_beams_v);
        const int cols = (static_cast<int>(freqs.size()) + 1) / 2;
        ForwardFiller filler(rows, (cols + cfg.downsample_stride - 1) / cfg.downsample_stride);

        std::vector<Snapshot> snaps;
        snaps.reserve(track.poses.size());
        for (const Pose& pose : track.poses) {
            auto mpcs = compute_multipath(pose, scene, cfg.array);
            CtfMatrix ctf = synthesize_ctf(mpcs, cfg.array, freqs);
            add_ctf_noise(ctf, cfg.snr_db, noise_rng);
            RawSrsGrid raw = raw_grid_from_ctf(ctf);
            apply_reception_mask(raw, cfg.p_miss, mask_rng);
            PrsgGrid averaged = prb_pair_average(raw);
            PrsgGrid down = prsg_downsample(averaged, cfg.downsample_stride);
            filler.fill(down);
            Snapshot snap = assemble_snapshot(down);
            snap.user = track.user;
            snap.t = pose.t;
            snap.x = pose.x;
            snap.y = pose.y;
            snap.heading = pose.heading;
            snaps.push_back(std::move(snap));
        }
        per_track[ti] = std::move(snaps);
    }

    std::vector<Snapshot> all;
    for (auto& v : per_track)
        all.insert(all.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    return all;
}

Positioner stage_train(const ExperimentConfig& cfg, const std::vector<Snapshot>& train_snaps,
                       std::vector<double>* losses)
{
    TrainOptions opt = cfg.train;
    opt.seed = cfg.seed;
    return train_positioner(train_snaps, cfg.model, opt, losses);
}

std::vector<PredictionRecord> stage_predict(const ExperimentConfig& cfg, Positioner& pos,
                                            const std::vector<Snapshot>& test_snaps, bool parallel)
{
    (void)cfg;
    return predict_batch(pos, test_snaps, parallel);
}

std::vector<ClusterAssignment> stage_cluster(const ExperimentConfig& cfg,
                                             const ClusterParams& params,
                                             const std::vector<PredictionRecord>& records,
                                             bool parallel)
{
    params.validate();
    return cluster_timeline(records, cfg.normalization, params, parallel);
}

std::string assignments_filename(const ClusterParams& params)
{
    return std::string("assignments_") + cluster_method_name(params.method) + "_" +
           format_double(params.eps_or_threshold()) + ".csv";
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                bool parallel)
{
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    auto path = [&](const std::string& name) { return out_dir + "/" + name; };
    std::vector<std::string> files;

    save_experiment_config(path("config.json"), cfg);
    files.push_back("config.json");

    auto tracks = run_stage("simulate", [&] { return stage_simulate(cfg); });
    export_trajectories_csv(path("trajectories.csv"), tracks);
    files.push_back("trajectories.csv");

    auto snaps =
        run_stage("preprocess", [&] { return stage_preprocess(cfg, tracks, parallel); });
    export_snapshots_csv(path("snapshots.csv"), snaps);
    files.push_back("snapshots.csv");

    std::vector<Snapshot> train_snaps, test_snaps;
    split_chronological(snaps, cfg.test_fraction, train_snaps, test_snaps);

    std::vector<double> losses;
    Positioner pos = run_stage("train", [&] { return stage_train(cfg, train_snaps, &losses); });
    save_positioner(path("model"), pos);
    files.insert(files.end(), {"model.json", "model_net.json", "model_net.bin"});
    {
        CsvWriter out(path("train_losses.csv"), {"epoch", "loss"});
        for (std::size_t i = 0; i < losses.size(); ++i)
            out.write_row({std::to_string(i), format_double(losses[i])});
        files.push_back("train_losses.csv");
    }

    auto preds =
        run_stage("predict", [&] { return stage_predict(cfg, pos, test_snaps, parallel); });
    auto smoothed = smooth_predictions(preds);
    export_predictions_csv(path("predictions.csv"), preds);
    export_predictions_csv(path("predictions_smoothed.csv"), smoothed);
    files.insert(files.end(), {"predictions.csv", "predictions_smoothed.csv"});

    for (const auto& params : cfg.clustering) {
        auto assigns =
            run_stage("cluster", [&] { return stage_cluster(cfg, params, smoothed, parallel); });
        const std::string name = assignments_filename(params);
        export_assignments_csv(path(name), assigns);
        files.push_back(name);
    }

    ExperimentResult result;
    result.out_dir = out_dir;
    result.hash = config_hash(cfg);
    result.n_snapshots = static_cast<int>(snaps.size());
    result.n_train = static_cast<int>(train_snaps.size());
    result.n_test = static_cast<int>(test_snaps.size());
    result.raw_metrics = run_stage("evaluate", [&] {
        return metrics_by_pattern(preds, cfg.patterns);
    });
    result.smoothed_metrics = metrics_by_pattern(smoothed, cfg.patterns);

    const std::string scen = scenario_name(cfg.scene.scenario);
    {
        CsvWriter out(path("metrics.csv"), kMetricsHeader);
        append_metrics_csv(out, scen, "raw", result.raw_metrics);
        append_metrics_csv(out, scen, "smoothed", result.smoothed_metrics);
        files.push_back("metrics.csv");
    }
    export_cdf(path("cdf_position_raw.csv"), position_errors(preds));
    export_cdf(path("cdf_position_smoothed.csv"), position_errors(smoothed));
    export_cdf(path("cdf_heading_raw.csv"), heading_errors(preds));
    export_cdf(path("cdf_heading_smoothed.csv"), heading_errors(smoothed));
    files.insert(files.end(), {"cdf_position_raw.csv", "cdf_position_smoothed.csv",
                               "cdf_heading_raw.csv", "cdf_heading_smoothed.csv"});

    std::map<int, int> per_user;
    for (const auto& s : snaps)
        ++per_user[s.user];
    json counts = json::array();
    for (const auto& [user, count] : per_user)
        counts.push_back({{"user", user}, {"snapshots", count}});

    std::sort(files.begin(), files.end());
    json manifest;
    manifest["config_hash"] = hash_hex(result.hash);
    manifest["seed"] = cfg.seed;
    manifest["name"] = cfg.name;
    manifest["scenario"] = scen;
    manifest["n_laps"] = cfg.patterns.size();
    manifest["n_users"] = cfg.n_users();
    manifest["snapshots"] = counts;
    manifest["n_snapshots"] = result.n_snapshots;
    manifest["n_train"] = result.n_train;
    manifest["n_test"] = result.n_test;
    manifest["model_parameters"] = pos.model.parameter_count();
    manifest["files"] = files;
    const MetricsReport& raw_all = result.raw_metrics.back();
    const MetricsReport& sm_all = result.smoothed_metrics.back();
    manifest["metrics"] = {
        {"raw", {{"rmse_dist", raw_all.rmse_dist}, {"rmse_heading", raw_all.rmse_heading}}},
        {"smoothed", {{"rmse_dist", sm_all.rmse_dist}, {"rmse_heading", sm_all.rmse_heading}}}};
    write_file(path("manifest.json"), manifest.dump(2) + "\n");

    return result;
}

} // namespace srsgroup
