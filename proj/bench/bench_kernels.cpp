// Timing harness for the hot kernels. Each section runs the OpenMP (or
// factored) implementation against its serial reference, checks that the
// outputs agree, and prints throughput for both.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "srsgroup/evaluation.hpp"
#include "srsgroup/rng.hpp"
#include "srsgroup/srs.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace srsgroup;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F> double time_call(F&& f, int repeats)
{
    const auto t0 = Clock::now();
    for (int i = 0; i < repeats; ++i)
        f();
    return seconds_since(t0) / repeats;
}

ExperimentConfig bench_config()
{
    ExperimentConfig cfg = default_experiment(Scenario::LoS);
    cfg.scene.lap_waypoints = {{-12.0, -8.0}, {12.0, -8.0}, {12.0, 8.0}, {-12.0, 8.0}};
    cfg.scene.sample_interval = 0.05;
    cfg.patterns = {Pattern::Clockwise, Pattern::Anticlockwise};
    return cfg;
}

void bench_synthesis()
{
    ExperimentConfig cfg = bench_config();
    Pose pose;
    pose.x = 20.0;
    pose.y = -10.0;
    pose.z = cfg.scene.path_height;
    pose.heading = 135.0;
    const auto mpcs = compute_multipath(pose, cfg.scene, cfg.array);
    const auto freqs = prb_center_frequencies(cfg.array);

    CtfMatrix fast = synthesize_ctf(mpcs, cfg.array, freqs);
    CtfMatrix ref = synthesize_ctf_reference(mpcs, cfg.array, freqs);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fast.values.size(); ++i) {
        num += std::norm(fast.values[i] - ref.values[i]);
        den += std::norm(ref.values[i]);
    }
    const double rel = std::sqrt(num / den);

    const double t_fast =
        time_call([&] { synthesize_ctf(mpcs, cfg.array, freqs); }, 20);
    const double t_ref =
        time_call([&] { synthesize_ctf_reference(mpcs, cfg.array, freqs); }, 2);
    std::printf("ctf synthesis      factored %8.2f ms   element-sum %8.2f ms   "
                "x%.1f   rel err %.2e\n",
                t_fast * 1e3, t_ref * 1e3, t_ref / t_fast, rel);
}

void bench_preprocess()
{
    ExperimentConfig cfg = bench_config();
    const auto tracks = stage_simulate(cfg);
    std::size_t poses = 0;
    for (const auto& t : tracks)
        poses += t.poses.size();

    const auto t0 = Clock::now();
    const auto serial = stage_preprocess(cfg, tracks, false);
    const double t_serial = seconds_since(t0);
    const auto t1 = Clock::now();
    const auto parallel = stage_preprocess(cfg, tracks, true);
    const double t_parallel = seconds_since(t1);

    bool equal = serial.size() == parallel.size();
    for (std::size_t i = 0; equal && i < serial.size(); ++i)
        equal = serial[i].features == parallel[i].features;
    std::printf("snapshot pipeline  serial %8.1f /s     parallel %8.1f /s     "
                "x%.2f  %s (%zu poses)\n",
                poses / t_serial, poses / t_parallel, t_serial / t_parallel,
                equal ? "bitwise equal" : "MISMATCH", poses);
}

void bench_inference()
{
    ExperimentConfig cfg = bench_config();
    const int n = 512;
    const int features = cfg.array.ue_layers * (cfg.array.n_beams_h + cfg.array.n_beams_v);

    std::vector<Snapshot> snaps(n);
    auto rng = make_rng(7, rng_stream::noise);
    std::uniform_real_distribution<double> uni(1e-4, 1.0);
    for (int i = 0; i < n; ++i) {
        snaps[i].user = i % 8;
        snaps[i].t = 0.02 * (i / 8);
        snaps[i].features.resize(features);
        for (double& f : snaps[i].features)
            f = uni(rng);
    }

    Positioner pos;
    pos.spec = cfg.model;
    pos.n_features = features;
    pos.model = build_model(cfg.model, features, 7);
    pos.scaler.mean.assign(features, 0.5);
    pos.scaler.stdev.assign(features, 0.2);

    const auto t0 = Clock::now();
    const auto serial = predict_batch(pos, snaps, false);
    const double t_serial = seconds_since(t0);
    const auto t1 = Clock::now();
    const auto parallel = predict_batch(pos, snaps, true);
    const double t_parallel = seconds_since(t1);

    bool equal = serial.size() == parallel.size();
    for (std::size_t i = 0; equal && i < serial.size(); ++i)
        equal = serial[i].x == parallel[i].x && serial[i].y == parallel[i].y &&
                serial[i].heading == parallel[i].heading;
    std::printf("inference          serial %8.1f /s     parallel %8.1f /s     "
                "x%.2f  %s (%d snapshots)\n",
                n / t_serial, n / t_parallel, t_serial / t_parallel,
                equal ? "bitwise equal" : "MISMATCH", n);
}

void bench_clustering()
{
    const int users = 64, instants = 200;
    std::vector<PredictionRecord> records;
    records.reserve(static_cast<std::size_t>(users) * instants);
    auto rng = make_rng(11, rng_stream::noise);
    std::uniform_real_distribution<double> ux(-60.0, 60.0), uy(-40.0, 40.0), uh(0.0, 360.0);
    for (int k = 0; k < instants; ++k)
        for (int u = 0; u < users; ++u) {
            PredictionRecord r;
            r.t = 0.02 * k;
            r.user = u;
            r.x = ux(rng);
            r.y = uy(rng);
            r.heading = uh(rng);
            records.push_back(r);
        }

    NormalizationConfig norm;
    norm.min_x = -60.0;
    norm.max_x = 60.0;
    norm.min_y = -40.0;
    norm.max_y = 40.0;
    ClusterParams params;
    params.method = ClusterMethod::Hierarchical;

    const auto t0 = Clock::now();
    const auto serial = cluster_timeline(records, norm, params, false);
    const double t_serial = seconds_since(t0);
    const auto t1 = Clock::now();
    const auto parallel = cluster_timeline(records, norm, params, true);
    const double t_parallel = seconds_since(t1);

    bool equal = serial.size() == parallel.size();
    for (std::size_t i = 0; equal && i < serial.size(); ++i)
        equal = serial[i].labels == parallel[i].labels;
    std::printf("ward clustering    serial %8.1f /s     parallel %8.1f /s     "
                "x%.2f  %s (%d instants x %d users)\n",
                instants / t_serial, instants / t_parallel, t_serial / t_parallel,
                equal ? "bitwise equal" : "MISMATCH", instants, users);
}

} // namespace

int main()
{
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled\n");
#endif
    bench_synthesis();
    bench_preprocess();
    bench_inference();
    bench_clustering();
    return 0;
}
