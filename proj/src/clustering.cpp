#include "srsgroup/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

#include "srsgroup/geometry.hpp"
#include "srsgroup/io.hpp"

namespace srsgroup {

const char* cluster_method_name(ClusterMethod m)
{
    return m == ClusterMethod::DBSCAN ? "dbscan" : "hierarchical";
}

const char* feature_mode_name(FeatureMode m)
{
    switch (m) {
    case FeatureMode::PositionOnly: return "position";
    case FeatureMode::PositionSinCos: return "position_sincos";
    case FeatureMode::PositionDegrees: return "position_degrees";
    }
    return "?";
}

ClusterMethod cluster_method_from_name(std::string_view name)
{
    if (name == "dbscan")
        return ClusterMethod::DBSCAN;
    if (name == "hierarchical")
        return ClusterMethod::Hierarchical;
    throw std::invalid_argument("unknown clustering method: " + std::string(name));
}

FeatureMode feature_mode_from_name(std::string_view name)
{
    for (FeatureMode m :
         {FeatureMode::PositionOnly, FeatureMode::PositionSinCos, FeatureMode::PositionDegrees})
        if (name == feature_mode_name(m))
            return m;
    throw std::invalid_argument("unknown feature mode: " + std::string(name));
}

void ClusterParams::validate() const
{
    if (eps <= 0.0)
        throw std::invalid_argument("cluster params: eps must be > 0");
    if (min_pts < 1)
        throw std::invalid_argument("cluster params: min_pts must be >= 1");
    if (distance_threshold <= 0.0)
        throw std::invalid_argument("cluster params: distance threshold must be > 0");
}

int NormalizationConfig::feature_length() const
{
    switch (mode) {
    case FeatureMode::PositionOnly: return 2;
    case FeatureMode::PositionSinCos: return 4;
    case FeatureMode::PositionDegrees: return 3;
    }
    return 2;
}

namespace {

double minmax_scale(double v, double lo, double hi)
{
    if (hi - lo < 1e-12)
        return 0.5;
    return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

} // namespace

std::vector<FeatureVector> normalize_features(const std::vector<PredictionRecord>& records,
                                              const NormalizationConfig& cfg)
{
    double min_x = cfg.min_x, max_x = cfg.max_x, min_y = cfg.min_y, max_y = cfg.max_y;
    if (cfg.per_instant && !records.empty()) {
        min_x = max_x = records.front().x;
        min_y = max_y = records.front().y;
        for (const PredictionRecord& r : records) {
            min_x = std::min(min_x, r.x);
            max_x = std::max(max_x, r.x);
            min_y = std::min(min_y, r.y);
            max_y = std::max(max_y, r.y);
        }
    }

    std::vector<FeatureVector> out;
    out.reserve(records.size());
    for (const PredictionRecord& r : records) {
        FeatureVector f;
        f.user = r.user;
        f.t = r.t;
        f.values.reserve(cfg.feature_length());
        f.values.push_back(minmax_scale(r.x, min_x, max_x));
        f.values.push_back(minmax_scale(r.y, min_y, max_y));
        if (cfg.mode == FeatureMode::PositionSinCos) {
            f.values.push_back(cfg.heading_weight * std::sin(deg_to_rad(r.heading)));
            f.values.push_back(cfg.heading_weight * std::cos(deg_to_rad(r.heading)));
        } else if (cfg.mode == FeatureMode::PositionDegrees) {
            f.values.push_back(cfg.heading_weight * wrap_degrees(r.heading) / 360.0);
        }
        out.push_back(std::move(f));
    }
    return out;
}

double ward_merge_distance(int size_a, const std::vector<double>& centroid_a, int size_b,
                           const std::vector<double>& centroid_b)
{
    if (size_a <= 0 || size_b <= 0)
        throw std::invalid_argument("ward: cluster sizes must be positive");
    if (centroid_a.size() != centroid_b.size())
        throw std::invalid_argument("ward: centroid dimension mismatch");
    const double mu_a = size_a, mu_b = size_b;
    return (mu_a * mu_b) / (mu_a + mu_b) * sq_dist(centroid_a, centroid_b);
}

int ClusterAssignment::n_clusters() const
{
    int top = -1;
    for (int l : labels)
        top = std::max(top, l);
    return top + 1;
}

ClusterAssignment dbscan(const std::vector<FeatureVector>& points, double eps, int min_pts)
{
    if (eps <= 0.0)
        throw std::invalid_argument("dbscan: eps must be > 0");
    if (min_pts < 1)
        throw std::invalid_argument("dbscan: min_pts must be >= 1");

    const int n = static_cast<int>(points.size());
    ClusterAssignment out;
    out.method = ClusterMethod::DBSCAN;
    out.eps_or_threshold = eps;
    if (n == 0)
        return out;
    out.t = points.front().t;

    const double eps_sq = eps * eps;
    auto region = [&](int i) {
        std::vector<int> hits;
        for (int j = 0; j < n; ++j)
            if (sq_dist(points[i].values, points[j].values) <= eps_sq)
                hits.push_back(j);
        return hits;
    };

    constexpr int kUnvisited = -2;
    std::vector<int> labels(n, kUnvisited);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        if (labels[i] != kUnvisited)
            continue;
        std::vector<int> seeds = region(i);
        if (static_cast<int>(seeds.size()) < min_pts) {
            labels[i] = kNoiseLabel;
            continue;
        }
        const int cluster = next++;
        labels[i] = cluster;
        std::deque<int> queue(seeds.begin(), seeds.end());
        while (!queue.empty()) {
            const int j = queue.front();
            queue.pop_front();
            if (labels[j] == kNoiseLabel)
                labels[j] = cluster; // border point adopted by the first core
            if (labels[j] != kUnvisited)
                continue;
            labels[j] = cluster;
            std::vector<int> nb = region(j);
            if (static_cast<int>(nb.size()) >= min_pts)
                queue.insert(queue.end(), nb.begin(), nb.end());
        }
    }

    out.users.reserve(n);
    out.labels = std::move(labels);
    for (const FeatureVector& p : points)
        out.users.push_back(p.user);
    return out;
}

HierarchicalResult hierarchical_cluster(const std::vector<FeatureVector>& points, double threshold)
{
    if (threshold <= 0.0)
        throw std::invalid_argument("hierarchical: threshold must be > 0");

    const int n = static_cast<int>(points.size());
    HierarchicalResult res;
    res.assignment.method = ClusterMethod::Hierarchical;
    res.assignment.eps_or_threshold = threshold;
    if (n == 0)
        return res;
    res.assignment.t = points.front().t;

    struct Cluster {
        bool active = true;
        int size = 0;
        int rep = 0; // smallest original point index
        std::vector<double> centroid;
        std::vector<int> members;
    };
    std::vector<Cluster> clusters(n);
    for (int i = 0; i < n; ++i) {
        clusters[i] = {true, 1, i, points[i].values, {i}};
        if (points[i].values.size() != points[0].values.size())
            throw std::invalid_argument("hierarchical: inhomogeneous feature lengths");
    }

    // Pairwise Ward costs, updated in place by Lance-Williams after each
    // merge so the greedy sequence is O(n^2) per round.
    std::vector<std::vector<double>> delta(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            delta[i][j] = delta[j][i] =
                ward_merge_distance(1, points[i].values, 1, points[j].values);

    const double cap = threshold * threshold;
    for (int round = 0; round < n - 1; ++round) {
        int best_i = -1, best_j = -1;
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!clusters[i].active)
                continue;
            for (int j = i + 1; j < n; ++j) {
                if (!clusters[j].active)
                    continue;
                const double d = delta[i][j];
                // representatives equal slot indices by construction, so
                // (i, j) order is already the lowest-pair tie-break
                if (best_i < 0 || d < best) {
                    best = d;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (best_i < 0 || best > cap)
            break;

        Cluster& a = clusters[best_i];
        Cluster& b = clusters[best_j];
        res.merges.push_back({a.rep, b.rep, best});

        const double na = a.size, nb = b.size;
        for (std::size_t d = 0; d < a.centroid.size(); ++d)
            a.centroid[d] = (na * a.centroid[d] + nb * b.centroid[d]) / (na + nb);
        a.members.insert(a.members.end(), b.members.begin(), b.members.end());
        a.size += b.size;
        b.active = false;

        for (int k = 0; k < n; ++k) {
            if (!clusters[k].active || k == best_i)
                continue;
            const double nk = clusters[k].size;
            const double merged = ((na + nk) * delta[best_i][k] + (nb + nk) * delta[best_j][k] -
                                   nk * best) /
                                  (na + nb + nk);
            delta[best_i][k] = delta[k][best_i] = merged;
        }
    }

    // labels by first appearance in input order
    std::vector<int> slot_of_point(n, -1);
    for (int i = 0; i < n; ++i)
        if (clusters[i].active)
            for (int m : clusters[i].members)
                slot_of_point[m] = i;
    std::map<int, int> label_of_slot;
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
        const int slot = slot_of_point[i];
        auto it = label_of_slot.find(slot);
        if (it == label_of_slot.end())
            it = label_of_slot.emplace(slot, static_cast<int>(label_of_slot.size())).first;
        labels[i] = it->second;
    }

    res.assignment.labels = std::move(labels);
    res.assignment.users.reserve(n);
    for (const FeatureVector& p : points)
        res.assignment.users.push_back(p.user);
    return res;
}

std::vector<ClusterAssignment> cluster_timeline(const std::vector<PredictionRecord>& records,
                                                const NormalizationConfig& norm,
                                                const ClusterParams& params, bool parallel)
{
    params.validate();

    std::map<double, std::vector<PredictionRecord>> instants;
    for (const PredictionRecord& r : records)
        instants[r.t].push_back(r);

    std::vector<std::vector<PredictionRecord>> groups;
    groups.reserve(instants.size());
    for (auto& [t, group] : instants)
        groups.push_back(std::move(group));

    std::vector<ClusterAssignment> out(groups.size());
    const int n = static_cast<int>(groups.size());

    auto run_one = [&](int g) {
        const std::vector<PredictionRecord>& group = groups[g];
        std::vector<FeatureVector> feats = normalize_features(group, norm);
        ClusterAssignment a;
        if (params.method == ClusterMethod::DBSCAN)
            a = dbscan(feats, params.eps, params.min_pts);
        else
            a = hierarchical_cluster(feats, params.distance_threshold).assignment;
        a.t = group.front().t;
        a.mode = norm.mode;
        a.x.reserve(group.size());
        for (const PredictionRecord& r : group) {
            a.x.push_back(r.x);
            a.y.push_back(r.y);
            a.heading.push_back(r.heading);
        }
        out[g] = std::move(a);
    };

    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int g = 0; g < n; ++g)
            run_one(g);
    } else {
        for (int g = 0; g < n; ++g)
            run_one(g);
    }
    return out;
}

void export_assignments_csv(const std::string& path,
                            const std::vector<ClusterAssignment>& assignments)
{
    CsvWriter w(path, {"t", "user", "x", "y", "heading", "label", "method", "eps_or_threshold",
                       "features_mode"});
    for (const ClusterAssignment& a : assignments) {
        for (std::size_t i = 0; i < a.users.size(); ++i) {
            w.write_row({format_double(a.t), std::to_string(a.users[i]),
                         i < a.x.size() ? format_double(a.x[i]) : "",
                         i < a.y.size() ? format_double(a.y[i]) : "",
                         i < a.heading.size() ? format_double(a.heading[i]) : "",
                         std::to_string(a.labels[i]), cluster_method_name(a.method),
                         format_double(a.eps_or_threshold), feature_mode_name(a.mode)});
        }
    }
}

} // namespace srsgroup
