#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "srsgroup/clustering.hpp"
#include "srsgroup/io.hpp"

using namespace srsgroup;

namespace {

FeatureVector fv(std::vector<double> values, int user = 0)
{
    FeatureVector f;
    f.values = std::move(values);
    f.user = user;
    return f;
}

std::vector<int> canonical(const std::vector<int>& labels)
{
    std::vector<int> out(labels.size());
    std::vector<int> seen;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) {
            out[i] = -1;
            continue;
        }
        auto it = std::find(seen.begin(), seen.end(), labels[i]);
        if (it == seen.end()) {
            seen.push_back(labels[i]);
            it = std::prev(seen.end());
        }
        out[i] = static_cast<int>(it - seen.begin());
    }
    return out;
}

struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int n) : parent(n)
    {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::vector<FeatureVector> random_points(std::mt19937_64& rng, int n, int dims)
{
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<FeatureVector> pts(n);
    for (int i = 0; i < n; ++i) {
        pts[i].user = i;
        pts[i].values.resize(dims);
        for (double& v : pts[i].values)
            v = uni(rng);
    }
    return pts;
}

// Reference agglomeration that recomputes every pairwise merge cost from
// scratch each round, with the same lowest-pair tie-break.
std::vector<MergeStep> naive_ward_sequence(const std::vector<FeatureVector>& pts, double threshold)
{
    struct C {
        std::vector<int> members;
        int rep;
    };
    std::vector<C> cs;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
        cs.push_back({{i}, i});

    auto centroid = [&](const C& c) {
        std::vector<double> m(pts[0].values.size(), 0.0);
        for (int idx : c.members)
            for (std::size_t d = 0; d < m.size(); ++d)
                m[d] += pts[idx].values[d];
        for (double& v : m)
            v /= c.members.size();
        return m;
    };

    std::vector<MergeStep> steps;
    while (cs.size() > 1) {
        int bi = -1, bj = -1;
        double best = 0.0;
        for (std::size_t i = 0; i < cs.size(); ++i)
            for (std::size_t j = i + 1; j < cs.size(); ++j) {
                const double d =
                    ward_merge_distance(static_cast<int>(cs[i].members.size()), centroid(cs[i]),
                                        static_cast<int>(cs[j].members.size()), centroid(cs[j]));
                const bool lower =
                    bi < 0 || d < best ||
                    (d == best && std::make_pair(cs[i].rep, cs[j].rep) <
                                      std::make_pair(cs[bi].rep, cs[bj].rep));
                if (lower) {
                    best = d;
                    bi = static_cast<int>(i);
                    bj = static_cast<int>(j);
                }
            }
        if (std::sqrt(best) > threshold)
            break;
        steps.push_back({cs[bi].rep, cs[bj].rep, best});
        cs[bi].members.insert(cs[bi].members.end(), cs[bj].members.begin(), cs[bj].members.end());
        cs[bi].rep = std::min(cs[bi].rep, cs[bj].rep);
        cs.erase(cs.begin() + bj);
    }
    return steps;
}

} // namespace

TEST_CASE("feature normalization: midpoint, heading encoding, clamping")
{
    NormalizationConfig cfg;
    cfg.min_x = 0.0;
    cfg.max_x = 60.0;
    cfg.min_y = 0.0;
    cfg.max_y = 40.0;

    PredictionRecord r;
    r.x = 30.0;
    r.y = 20.0;
    r.heading = 90.0;
    r.user = 3;
    r.t = 1.5;

    auto f = normalize_features({r}, cfg);
    REQUIRE(f.size() == 1);
    REQUIRE(f[0].values.size() == 4);
    CHECK(f[0].user == 3);
    CHECK(f[0].t == 1.5);
    CHECK(f[0].values[0] == doctest::Approx(0.5));
    CHECK(f[0].values[1] == doctest::Approx(0.5));
    CHECK(f[0].values[2] == doctest::Approx(0.5));              // 0.5 * sin 90
    CHECK(f[0].values[3] == doctest::Approx(0.0).epsilon(1e-12)); // 0.5 * cos 90

    cfg.mode = FeatureMode::PositionOnly;
    CHECK(normalize_features({r}, cfg)[0].values.size() == 2);

    cfg.mode = FeatureMode::PositionDegrees;
    auto fd = normalize_features({r}, cfg);
    REQUIRE(fd[0].values.size() == 3);
    CHECK(fd[0].values[2] == doctest::Approx(0.5 * 90.0 / 360.0));

    cfg.mode = FeatureMode::PositionOnly;
    PredictionRecord outside;
    outside.x = -10.0;
    outside.y = 100.0;
    auto fo = normalize_features({outside}, cfg);
    CHECK(fo[0].values[0] == 0.0);
    CHECK(fo[0].values[1] == 1.0);

    NormalizationConfig degenerate;
    degenerate.min_x = degenerate.max_x = 5.0;
    degenerate.min_y = 0.0;
    degenerate.max_y = 1.0;
    auto fz = normalize_features({r}, degenerate);
    CHECK(fz[0].values[0] == 0.5);

    NormalizationConfig per_inst;
    per_inst.per_instant = true;
    per_inst.mode = FeatureMode::PositionOnly;
    PredictionRecord a, b;
    a.x = 2.0;
    a.y = 10.0;
    b.x = 4.0;
    b.y = 30.0;
    auto fp = normalize_features({a, b}, per_inst);
    CHECK(fp[0].values[0] == 0.0);
    CHECK(fp[1].values[0] == 1.0);
    CHECK(fp[0].values[1] == 0.0);
    CHECK(fp[1].values[1] == 1.0);
    auto fsingle = normalize_features({a}, per_inst);
    CHECK(fsingle[0].values[0] == 0.5);
}

TEST_CASE("ward merge cost closed forms")
{
    CHECK(ward_merge_distance(1, {0.0, 0.0}, 1, {3.0, 4.0}) == doctest::Approx(12.5));
    CHECK(ward_merge_distance(2, {0.0}, 2, {2.0}) == doctest::Approx(4.0));
    CHECK(ward_merge_distance(5, {1.0, 2.0}, 7, {1.0, 2.0}) == 0.0);
    CHECK_THROWS_AS(ward_merge_distance(0, {1.0}, 1, {2.0}), std::invalid_argument);
    CHECK_THROWS_AS(ward_merge_distance(1, {1.0}, 1, {2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("dbscan hand examples")
{
    auto a = dbscan({fv({0.0}), fv({0.4}), fv({1.2})}, 0.5, 1);
    CHECK(a.labels == std::vector<int>{0, 0, 1});
    CHECK(a.n_clusters() == 2);

    auto noise = dbscan({fv({0.0}), fv({0.1})}, 0.5, 3);
    CHECK(noise.labels == std::vector<int>{-1, -1});
    CHECK(noise.n_clusters() == 0);

    CHECK(dbscan({}, 0.5, 1).labels.empty());

    // boundary distance is inside the neighborhood
    auto edge = dbscan({fv({0.0}), fv({0.5})}, 0.5, 1);
    CHECK(edge.labels == std::vector<int>{0, 0});

    // transitive chaining across the eps graph
    auto chain = dbscan({fv({0.0}), fv({0.5}), fv({1.0}), fv({3.0})}, 0.5, 1);
    CHECK(chain.labels == std::vector<int>{0, 0, 0, 1});

    // min_pts 2: three points in a line all core, isolated point is noise
    auto mixed = dbscan({fv({0.0}), fv({0.4}), fv({0.8}), fv({10.0})}, 0.5, 2);
    CHECK(mixed.labels == std::vector<int>{0, 0, 0, -1});

    CHECK_THROWS_AS(dbscan({fv({0.0})}, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(dbscan({fv({0.0})}, 0.5, 0), std::invalid_argument);
}

TEST_CASE("dbscan equals connected components for min_pts 1")
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 40 + static_cast<int>(rng() % 40);
        const int dims = 2 + static_cast<int>(rng() % 3);
        const double eps = trial % 2 == 0 ? 0.5 : 0.6;
        auto pts = random_points(rng, n, dims);

        Dsu dsu(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double d2 = 0;
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
        CHECK(canonical(got.labels) == canonical(oracle));
    }
}

TEST_CASE("dbscan partitions ignore input order and isometries")
{
    std::mt19937_64 rng(77);
    auto pts = random_points(rng, 50, 2);
    auto base = dbscan(pts, 0.3, 1);

    std::vector<int> perm(50);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<FeatureVector> shuffled(50);
    for (int i = 0; i < 50; ++i)
        shuffled[i] = pts[perm[i]];
    auto permuted = dbscan(shuffled, 0.3, 1);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) {
            const bool same_base = base.labels[perm[i]] == base.labels[perm[j]];
            const bool same_perm = permuted.labels[i] == permuted.labels[j];
            CHECK(same_base == same_perm);
        }

    const double c = std::cos(0.7), s = std::sin(0.7);
    std::vector<FeatureVector> moved = pts;
    for (auto& p : moved) {
        const double x = p.values[0], y = p.values[1];
        p.values[0] = c * x - s * y + 10.0;
        p.values[1] = s * x + c * y - 3.0;
    }
    auto iso = dbscan(moved, 0.3, 1);
    CHECK(canonical(iso.labels) == canonical(base.labels));
}

TEST_CASE("hierarchical worked example and threshold limits")
{
    std::vector<FeatureVector> pts{fv({0.0}, 10), fv({1.0}, 11), fv({10.0}, 12)};

    auto tight = hierarchical_cluster(pts, 1e-9);
    CHECK(tight.assignment.labels == std::vector<int>{0, 1, 2});
    CHECK(tight.merges.empty());

    auto mid = hierarchical_cluster(pts, 1.0);
    REQUIRE(mid.merges.size() == 1);
    CHECK(mid.merges[0].a == 0);
    CHECK(mid.merges[0].b == 1);
    CHECK(mid.merges[0].delta == doctest::Approx(0.5)); // half the unit gap squared
    CHECK(mid.assignment.labels == std::vector<int>{0, 0, 1});
    CHECK(mid.assignment.users == std::vector<int>{10, 11, 12});

    // next merge cost: sizes 2 and 1, centroids 0.5 and 10
    auto loose = hierarchical_cluster(pts, 8.0);
    REQUIRE(loose.merges.size() == 2);
    CHECK(loose.merges[1].delta == doctest::Approx((2.0 / 3.0) * 9.5 * 9.5));
    CHECK(loose.assignment.n_clusters() == 1);

    auto wide = hierarchical_cluster(pts, 1e9);
    CHECK(wide.assignment.n_clusters() == 1);

    // equal costs resolve toward the lowest index pair
    std::vector<FeatureVector> twin{fv({0.0}), fv({1.0}), fv({10.0}), fv({11.0})};
    auto t = hierarchical_cluster(twin, 1.0);
    REQUIRE(t.merges.size() == 2);
    CHECK(t.merges[0].a == 0);
    CHECK(t.merges[0].b == 1);
    CHECK(t.merges[1].a == 2);
    CHECK(t.merges[1].b == 3);
    CHECK(t.assignment.labels == std::vector<int>{0, 0, 1, 1});

    CHECK(hierarchical_cluster({}, 1.0).assignment.labels.empty());
    CHECK_THROWS_AS(hierarchical_cluster(pts, 0.0), std::invalid_argument);
}

TEST_CASE("lance-williams agglomeration matches the naive recomputation")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 5 + static_cast<int>(rng() % 26);
        const int dims = 2 + static_cast<int>(rng() % 3);
        auto pts = random_points(rng, n, dims);
        const double threshold = trial % 2 == 0 ? 0.6 : 1e9;

        auto fast = hierarchical_cluster(pts, threshold);
        auto oracle = naive_ward_sequence(pts, threshold);

        REQUIRE(fast.merges.size() == oracle.size());
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            CHECK(fast.merges[i].a == oracle[i].a);
            CHECK(fast.merges[i].b == oracle[i].b);
            CHECK(fast.merges[i].delta ==
                  doctest::Approx(oracle[i].delta).epsilon(1e-9));
        }
    }
}

TEST_CASE("ward merge costs are non-decreasing along the greedy sequence")
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 6; ++trial) {
        auto pts = random_points(rng, 30, 3);
        auto res = hierarchical_cluster(pts, 1e9);
        REQUIRE(res.merges.size() == 29);
        for (std::size_t i = 1; i < res.merges.size(); ++i)
            CHECK(res.merges[i].delta >= res.merges[i - 1].delta - 1e-9);
    }
}

TEST_CASE("co-located groups split only when heading features are enabled")
{
    // two user groups on the same spot, driving in opposite directions
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
        REQUIRE(plain.size() == 1);
        CHECK(plain[0].n_clusters() == 1);

        norm.mode = FeatureMode::PositionSinCos;
        auto with_heading = cluster_timeline(records, norm, params, false);
        REQUIRE(with_heading.size() == 1);
        CHECK(with_heading[0].n_clusters() >= 2);
    }
}

TEST_CASE("timeline clustering is per instant, parallel-stable, exportable")
{
    std::vector<PredictionRecord> records;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.0, 60.0);
    for (int k = 0; k < 5; ++k) {
        for (int u = 0; u < 6; ++u) {
            PredictionRecord r;
            r.user = u;
            r.t = 0.02 * k;
            r.x = uni(rng);
            r.y = uni(rng) / 1.5;
            r.heading = uni(rng) * 6.0;
            records.push_back(r);
        }
    }

    NormalizationConfig norm;
    norm.max_x = 60.0;
    norm.max_y = 40.0;
    ClusterParams params;
    params.method = ClusterMethod::Hierarchical;
    params.distance_threshold = 0.5;

    auto serial = cluster_timeline(records, norm, params, false);
    auto parallel = cluster_timeline(records, norm, params, true);
    REQUIRE(serial.size() == 5);
    REQUIRE(parallel.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(serial[i].t == doctest::Approx(0.02 * i));
        CHECK(serial[i].users == parallel[i].users);
        CHECK(serial[i].labels == parallel[i].labels);
        CHECK(serial[i].users.size() == 6);
        CHECK(serial[i].method == ClusterMethod::Hierarchical);
        CHECK(serial[i].eps_or_threshold == 0.5);
        CHECK(serial[i].mode == FeatureMode::PositionSinCos);
    }

    export_assignments_csv("assignments_roundtrip.csv", serial);
    CsvTable table = read_csv("assignments_roundtrip.csv");
    CHECK(table.rows.size() == 30);
    REQUIRE(table.column("label") >= 0);
    REQUIRE(table.column("method") >= 0);
    CHECK(table.rows[0][table.column("method")] == "hierarchical");
    CHECK(table.rows[0][table.column("features_mode")] == "position_sincos");

    ClusterParams bad;
    bad.eps = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ClusterParams{};
    bad.min_pts = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    for (auto name : {"dbscan", "hierarchical"})
        CHECK(cluster_method_name(cluster_method_from_name(name)) == std::string(name));
    for (auto name : {"position", "position_sincos", "position_degrees"})
        CHECK(feature_mode_name(feature_mode_from_name(name)) == std::string(name));
}
