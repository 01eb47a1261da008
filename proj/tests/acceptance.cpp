// Release gate for the testbed. Each check prints exactly one PASS/FAIL
// line; the process exits with the number of failed checks. Checks are
// self-contained: every computed result is compared against an
// independently coded reference or a hand-derived closed form.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "srsgroup/evaluation.hpp"
#include "srsgroup/rng.hpp"
#include "srsgroup/srs.hpp"

using namespace srsgroup;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& why)
    {
        if (!cond && ok) {
            ok = false;
            detail = why;
        }
    }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

// ---------------------------------------------------------------- check 1

Outcome check_pipeline_counts()
{
    Outcome out;
    auto rng = make_rng(1, rng_stream::noise);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    for (int trial = 0; trial < 5; ++trial) {
        CtfMatrix ctf;
        ctf.n_beams_h = 32;
        ctf.n_beams_v = 32;
        ctf.n_layers = 2;
        ctf.n_freq = 273;
        ctf.values.resize(static_cast<std::size_t>(ctf.rows()) * ctf.n_freq);
        for (auto& v : ctf.values)
            v = {uni(rng), uni(rng)};

        RawSrsGrid raw = raw_grid_from_ctf(ctf);
        out.require(raw.n_prb == 273, "raw grid is not 273 PRBs wide");
        out.require(raw.n_prsg() == 137, fmt("pair count %g != 137", raw.n_prsg()));

        PrsgGrid averaged = prb_pair_average(raw);
        out.require(averaged.n_cols == 137, fmt("averaged width %g != 137", averaged.n_cols));

        PrsgGrid down = prsg_downsample(averaged, 3);
        out.require(down.n_cols == 46, fmt("decimated width %g != 46", down.n_cols));

        ForwardFiller filler(down.n_rows, down.n_cols);
        filler.fill(down);
        Snapshot snap = assemble_snapshot(down);
        out.require(snap.features.size() == 128,
                    fmt("snapshot length %g != 128", static_cast<double>(snap.features.size())));
    }
    if (out.ok)
        out.detail = "273 -> 137 -> 46 columns, 128-value snapshot";
    return out;
}

// ---------------------------------------------------------------- check 2

std::vector<MultipathComponent> random_components(std::mt19937_64& rng, int n_paths, int layers)
{
    std::uniform_real_distribution<double> delay(1e-7, 1e-6);
    std::uniform_real_distribution<double> az(-1.4, 1.4);
    std::uniform_real_distribution<double> el(-0.7, 0.7);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::vector<MultipathComponent> mpcs(n_paths);
    for (auto& m : mpcs) {
        m.delay = delay(rng);
        m.azimuth = az(rng);
        m.elevation = el(rng);
        for (int l = 0; l < layers; ++l)
            m.amplitude_per_layer.push_back({amp(rng), amp(rng)});
    }
    return mpcs;
}

Outcome check_synthesis_oracle()
{
    Outcome out;
    ArrayConfig array;
    const auto grid = prsg_center_frequencies(array);
    auto rng = make_rng(2, rng_stream::noise);
    std::uniform_int_distribution<int> n_paths(1, 8);

    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto mpcs = random_components(rng, n_paths(rng), array.ue_layers);
        CtfMatrix fast = synthesize_ctf(mpcs, array, grid);
        CtfMatrix ref = synthesize_ctf_reference(mpcs, array, grid);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < fast.values.size(); ++i) {
            num += std::norm(fast.values[i] - ref.values[i]);
            den += std::norm(ref.values[i]);
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    out.require(worst <= 1e-12, fmt("factored vs element-sum rel error %.3e > 1e-12", worst));
    if (out.ok)
        out.detail = fmt("100 random path sets, worst rel error %.2e", worst);
    return out;
}

// ---------------------------------------------------------------- check 3

Outcome check_gradients()
{
    Outcome out;
    const int channels = 2, length = 12, batch = 3, features = channels * length;

    Model model;
    model.add(std::make_unique<Conv1DLayer>(channels, 5, 3, length));
    model.add(std::make_unique<ReluLayer>());
    model.add(std::make_unique<Conv1DLayer>(5, 4, 1, length));
    model.add(std::make_unique<ReluLayer>());
    model.add(std::make_unique<FlattenLayer>());
    model.add(std::make_unique<DenseLayer>(4 * length, 10));
    model.add(std::make_unique<ReluLayer>());
    model.add(std::make_unique<DenseLayer>(10, 3));
    model.initialize(99);

    // nudge every parameter (biases start at zero) so no ReLU input sits
    // exactly on the kink where one-sided slopes break the comparison
    auto jitter_rng = make_rng(5, rng_stream::weight_init);
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    for (Tensor* t : model.tensors())
        for (double& v : t->value)
            v += jitter(jitter_rng);
    model.refresh();

    auto rng = make_rng(3, rng_stream::noise);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Matrix x(batch, features), target(batch, 3);
    for (double& v : x.data)
        v = uni(rng);
    for (double& v : target.data)
        v = uni(rng);

    auto loss_of = [&]() {
        const Matrix& y = model.forward(x);
        return mse_loss(y, target);
    };

    model.zero_grad();
    const Matrix& y = model.forward(x);
    Matrix grad = mse_gradient(y, target);
    model.backward(grad);

    double worst = 0.0;
    int checked = 0;
    for (Tensor* t : model.tensors()) {
        for (std::size_t i = 0; i < t->value.size(); ++i) {
            const double keep = t->value[i];
            const double h = 1e-6;
            t->value[i] = keep + h;
            model.refresh();
            const double up = loss_of();
            t->value[i] = keep - h;
            model.refresh();
            const double down = loss_of();
            t->value[i] = keep;
            model.refresh();

            const double numeric = (up - down) / (2.0 * h);
            const double analytic = t->grad[i];
            const double scale = std::max(std::fabs(numeric), std::fabs(analytic));
            const double rel = scale > 1e-6 ? std::fabs(numeric - analytic) / scale
                                            : std::fabs(numeric - analytic);
            worst = std::max(worst, rel);
            ++checked;
        }
    }
    out.require(worst < 1e-4, fmt("finite-difference rel error %.3e >= 1e-4", worst));
    if (out.ok)
        out.detail = fmt("%g parameters over conv/relu/flatten/dense, worst rel %.1e",
                         static_cast<double>(checked), worst);
    return out;
}

// ---------------------------------------------------------------- check 4

struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::vector<int> canonical(const std::vector<int>& labels)
{
    std::vector<int> out(labels.size()), seen;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = std::find(seen.begin(), seen.end(), labels[i]);
        if (it == seen.end()) {
            seen.push_back(labels[i]);
            it = std::prev(seen.end());
        }
        out[i] = static_cast<int>(it - seen.begin());
    }
    return out;
}

Outcome check_density_oracle()
{
    Outcome out;
    auto rng = make_rng(4, rng_stream::noise);
    int worst_n = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 20 + static_cast<int>(rng() % 181); // up to 200
        const int dims = 2 + static_cast<int>(rng() % 3);
        const double eps = trial % 2 == 0 ? 0.5 : 0.6;
        std::uniform_real_distribution<double> uni(0.0, 4.0);

        std::vector<FeatureVector> pts(n);
        for (int i = 0; i < n; ++i) {
            pts[i].user = i;
            pts[i].values.resize(dims);
            for (double& v : pts[i].values)
                v = uni(rng);
        }

        Dsu dsu(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double d2 = 0.0;
                for (int d = 0; d < dims; ++d) {
                    const double dd = pts[i].values[d] - pts[j].values[d];
                    d2 += dd * dd;
                }
                if (d2 <= eps * eps)
                    dsu.unite(i, j);
            }
        std::vector<int> oracle(n);
        for (int i = 0; i < n; ++i)
            oracle[i] = dsu.find(i);

        auto got = dbscan(pts, eps, 1);
        out.require(canonical(got.labels) == canonical(oracle),
                    fmt("partition mismatch at n=%g dims=%g eps=%g", n, dims, eps));
        worst_n = std::max(worst_n, n);
    }
    if (out.ok)
        out.detail = fmt("50 instances up to n=%g match connected components exactly",
                         static_cast<double>(worst_n));
    return out;
}

// ---------------------------------------------------------------- check 5

Outcome check_ward_oracle()
{
    Outcome out;

    // singleton merge cost closed form, exact equality
    auto srng = make_rng(6, rng_stream::noise);
    std::uniform_real_distribution<double> uni(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(3), b(3);
        for (int d = 0; d < 3; ++d) {
            a[d] = uni(srng);
            b[d] = uni(srng);
        }
        double d2 = 0.0;
        for (int d = 0; d < 3; ++d) {
            const double dd = a[d] - b[d];
            d2 += dd * dd;
        }
        out.require(ward_merge_distance(1, a, 1, b) == 0.5 * d2,
                    "singleton cost is not exactly half the squared gap");
    }

    for (std::uint64_t seed = 0; seed < 20 && out.ok; ++seed) {
        auto rng = make_rng(seed, rng_stream::noise, 77);
        const int n = 5 + static_cast<int>(rng() % 46); // up to 50
        const int dims = 2 + static_cast<int>(rng() % 3);
        std::vector<FeatureVector> pts(n);
        for (int i = 0; i < n; ++i) {
            pts[i].user = i;
            pts[i].values.resize(dims);
            for (double& v : pts[i].values)
                v = uni(rng);
        }

        auto fast = hierarchical_cluster(pts, 1e12);

        // reference: recompute every pair cost from scratch each round
        struct C {
            std::vector<int> members;
            int rep;
        };
        std::vector<C> cs;
        for (int i = 0; i < n; ++i)
            cs.push_back({{i}, i});
        auto centroid = [&](const C& c) {
            std::vector<double> m(dims, 0.0);
            for (int idx : c.members)
                for (int d = 0; d < dims; ++d)
                    m[d] += pts[idx].values[d];
            for (double& v : m)
                v /= static_cast<double>(c.members.size());
            return m;
        };

        std::size_t step = 0;
        while (cs.size() > 1 && out.ok) {
            int bi = -1, bj = -1;
            double best = 0.0;
            for (std::size_t i = 0; i < cs.size(); ++i)
                for (std::size_t j = i + 1; j < cs.size(); ++j) {
                    const double d = ward_merge_distance(
                        static_cast<int>(cs[i].members.size()), centroid(cs[i]),
                        static_cast<int>(cs[j].members.size()), centroid(cs[j]));
                    const bool better =
                        bi < 0 || d < best ||
                        (d == best && std::make_pair(cs[i].rep, cs[j].rep) <
                                          std::make_pair(cs[bi].rep, cs[bj].rep));
                    if (better) {
                        best = d;
                        bi = static_cast<int>(i);
                        bj = static_cast<int>(j);
                    }
                }
            out.require(step < fast.merges.size(), "merge sequence ended early");
            if (!out.ok)
                break;
            const MergeStep& got = fast.merges[step];
            out.require(got.a == cs[bi].rep && got.b == cs[bj].rep,
                        fmt("merge %g picked a different pair", static_cast<double>(step)));
            out.require(std::fabs(got.delta - best) <= 1e-9 * std::max(1.0, best),
                        fmt("merge %g cost drifted", static_cast<double>(step)));
            cs[bi].members.insert(cs[bi].members.end(), cs[bj].members.begin(),
                                  cs[bj].members.end());
            cs[bi].rep = std::min(cs[bi].rep, cs[bj].rep);
            cs.erase(cs.begin() + bj);
            ++step;
        }
        out.require(!out.ok || step == fast.merges.size(), "merge sequence has extra steps");
    }
    if (out.ok)
        out.detail = "20 seeds match the per-round recomputation; singleton costs exact";
    return out;
}

// ---------------------------------------------------------------- check 6

struct DeskRun {
    double rmse_dist = 0.0;
    double rmse_heading = 0.0;
    double diagonal = 0.0;
};

DeskRun desk_run(Scenario scenario)
{
    ExperimentConfig cfg = default_experiment(scenario);
    auto tracks = stage_simulate(cfg);

    double min_x = tracks[0].poses[0].x, max_x = min_x;
    double min_y = tracks[0].poses[0].y, max_y = min_y;
    for (const auto& tr : tracks)
        for (const auto& p : tr.poses) {
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }

    auto snaps = stage_preprocess(cfg, tracks, true);
    std::vector<Snapshot> train_snaps, test_snaps;
    split_chronological(snaps, cfg.test_fraction, train_snaps, test_snaps);
    Positioner pos = stage_train(cfg, train_snaps, nullptr);
    auto preds = stage_predict(cfg, pos, test_snaps, true);
    auto smoothed = smooth_predictions(preds);
    MetricsReport m = compute_metrics(smoothed);

    DeskRun r;
    r.rmse_dist = m.rmse_dist;
    r.rmse_heading = m.rmse_heading;
    r.diagonal = std::hypot(max_x - min_x, max_y - min_y);
    return r;
}

Outcome check_positioning_sanity()
{
    Outcome out;
    DeskRun los = desk_run(Scenario::LoS);
    out.require(los.rmse_dist <= 0.05 * los.diagonal,
                fmt("los rmse %.2f m > 5%% of %.1f m diagonal", los.rmse_dist, los.diagonal));
    out.require(los.rmse_heading <= 15.0,
                fmt("los heading rmse %.2f deg > 15 deg", los.rmse_heading));

    DeskRun nlos = desk_run(Scenario::NLoS);
    out.require(nlos.rmse_dist <= 0.10 * nlos.diagonal,
                fmt("nlos rmse %.2f m > 10%% of %.1f m diagonal", nlos.rmse_dist, nlos.diagonal));

    if (out.ok)
        out.detail = fmt("los %.2f m / %.1f deg", los.rmse_dist, los.rmse_heading) +
                     fmt(", nlos %.2f m (diagonal %.1f m)", nlos.rmse_dist, nlos.diagonal);
    return out;
}

// ---------------------------------------------------------------- check 7

Outcome check_heading_separation()
{
    Outcome out;
    std::vector<PredictionRecord> records;
    for (int u = 0; u < 8; ++u) {
        PredictionRecord r;
        r.user = u;
        r.t = 0.0;
        r.x = 30.0 + 0.01 * u;
        r.y = 20.0 - 0.01 * u;
        r.heading = u < 4 ? 0.0 : 180.0;
        records.push_back(r);
    }

    NormalizationConfig norm;
    norm.min_x = 0.0;
    norm.max_x = 60.0;
    norm.min_y = 0.0;
    norm.max_y = 40.0;

    for (auto method : {ClusterMethod::DBSCAN, ClusterMethod::Hierarchical}) {
        ClusterParams params;
        params.method = method;

        norm.mode = FeatureMode::PositionOnly;
        auto plain = cluster_timeline(records, norm, params, false);
        out.require(plain.size() == 1 && plain[0].n_clusters() == 1,
                    std::string(cluster_method_name(method)) +
                        ": expected one cluster without heading features");

        norm.mode = FeatureMode::PositionSinCos;
        auto split = cluster_timeline(records, norm, params, false);
        out.require(split.size() == 1 && split[0].n_clusters() >= 2,
                    std::string(cluster_method_name(method)) +
                        ": heading features did not separate the groups");
    }
    if (out.ok)
        out.detail = "both methods: 1 cluster plain, >=2 with heading features";
    return out;
}

// ---------------------------------------------------------------- check 8

Outcome check_smoothing_and_wrap()
{
    Outcome out;

    std::vector<PredictionRecord> records;
    const int lead = 4, steps = 40;
    for (int i = 0; i < lead + steps; ++i) {
        PredictionRecord r;
        r.user = 0;
        r.t = 0.02 * i;
        r.x = i < lead ? 0.0 : 1.0;
        records.push_back(r);
    }
    auto smoothed = smooth_predictions(records);
    for (int k = 1; k <= steps; ++k) {
        const double expected = 1.0 - std::ldexp(1.0, -k); // 1 - 2^-k
        const double got = smoothed[lead + k - 1].x;
        out.require(std::fabs(got - expected) <= 1e-12,
                    fmt("step response at k=%g is off by %.2e", k, std::fabs(got - expected)));
    }

    out.require(heading_error(359.0, 1.0) == 2.0, "wrapped difference of 359 and 1 is not 2");
    out.require(heading_error(1.0, 359.0) == 2.0, "wrapped difference is not symmetric");
    if (out.ok)
        out.detail = "step response equals 1 - 2^-k; 359 vs 1 wraps to 2 exactly";
    return out;
}

// ---------------------------------------------------------------- check 9

Outcome check_reproducibility()
{
    Outcome out;
    ExperimentConfig cfg = default_experiment(Scenario::LoS);
    cfg.name = "repro";
    cfg.scene.lap_waypoints = {{-6.0, -4.0}, {6.0, -4.0}, {6.0, 4.0}, {-6.0, 4.0}};
    cfg.scene.sample_interval = 0.1;
    cfg.scene.jitter_amplitude = 0.5;
    cfg.patterns = {Pattern::Clockwise, Pattern::ClockwiseRandom};
    cfg.model.use_cnn = false;
    cfg.model.dense_widths = {32, 16};
    cfg.train.epochs = 3;
    cfg.train.batch_size = 16;
    cfg.normalization.min_x = -6.0;
    cfg.normalization.max_x = 6.0;
    cfg.normalization.min_y = -4.0;
    cfg.normalization.max_y = 4.0;

    std::filesystem::remove_all("acceptance_run_a");
    std::filesystem::remove_all("acceptance_run_b");
    run_experiment(cfg, "acceptance_run_a", true);
    run_experiment(cfg, "acceptance_run_b", true);

    int compared = 0;
    for (const auto& entry : std::filesystem::directory_iterator("acceptance_run_a")) {
        const std::string name = entry.path().filename().string();
        const std::string other = "acceptance_run_b/" + name;
        out.require(std::filesystem::exists(other), name + " missing from second run");
        if (!out.ok)
            break;
        out.require(read_file(entry.path().string()) == read_file(other),
                    name + " differs between identical runs");
        ++compared;
    }
    out.require(compared > 10, "second run produced too few artifacts");
    if (out.ok)
        out.detail = fmt("%g artifacts byte-identical across reruns",
                         static_cast<double>(compared));
    return out;
}

} // namespace

int main()
{
    struct Check {
        const char* name;
        double time_limit; // seconds, 0 = no limit
        std::function<Outcome()> fn;
    };
    const std::vector<Check> checks = {
        {"pipeline-counts", 1.0, check_pipeline_counts},
        {"beam-synthesis-oracle", 10.0, check_synthesis_oracle},
        {"gradient-finite-difference", 30.0, check_gradients},
        {"density-clustering-oracle", 30.0, check_density_oracle},
        {"ward-linkage-oracle", 60.0, check_ward_oracle},
        {"desk-positioning-sanity", 720.0, check_positioning_sanity},
        {"heading-feature-separation", 1.0, check_heading_separation},
        {"smoothing-and-wrap", 0.0, check_smoothing_and_wrap},
        {"rerun-reproducibility", 0.0, check_reproducibility},
    };

    int failed = 0;
    for (const auto& check : checks) {
        const auto t0 = Clock::now();
        Outcome out;
        try {
            out = check.fn();
        } catch (const std::exception& e) {
            out.ok = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        if (out.ok && check.time_limit > 0.0 && secs > check.time_limit) {
            out.ok = false;
            out.detail = fmt("took %.1f s, limit %.0f s", secs, check.time_limit);
        }
        std::printf("%s  %-28s (%6.1f s)  %s\n", out.ok ? "PASS" : "FAIL", check.name, secs,
                    out.detail.c_str());
        std::fflush(stdout);
        if (!out.ok)
            ++failed;
    }
    return failed;
}
