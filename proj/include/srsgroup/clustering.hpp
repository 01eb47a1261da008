#ifndef SRSGROUP_CLUSTERING_HPP
#define SRSGROUP_CLUSTERING_HPP

#include <string>
#include <string_view>
#include <vector>

#include "srsgroup/positioning.hpp"

namespace srsgroup {

enum class ClusterMethod { DBSCAN, Hierarchical };
enum class FeatureMode { PositionOnly, PositionSinCos, PositionDegrees };

const char* cluster_method_name(ClusterMethod m);
const char* feature_mode_name(FeatureMode m);
ClusterMethod cluster_method_from_name(std::string_view name);
FeatureMode feature_mode_from_name(std::string_view name);

inline constexpr int kNoiseLabel = -1;

struct ClusterParams {
    ClusterMethod method = ClusterMethod::DBSCAN;
    double eps = 0.5;
    int min_pts = 1;
    double distance_threshold = 0.5;

    double eps_or_threshold() const
    {
        return method == ClusterMethod::DBSCAN ? eps : distance_threshold;
    }
    void validate() const;
};

// Feature-space normalization: positions min-max scaled over a fixed
// reference frame (or per call with per_instant), heading folded in as a
// weighted sin/cos pair or scaled degrees.
struct NormalizationConfig {
    double min_x = 0.0, max_x = 1.0;
    double min_y = 0.0, max_y = 1.0;
    bool per_instant = false;
    double heading_weight = 0.5;
    FeatureMode mode = FeatureMode::PositionSinCos;

    int feature_length() const;
};

struct FeatureVector {
    std::vector<double> values;
    int user = 0;
    double t = 0.0;
};

// Per-instant grouping: labels run parallel to users, noise is -1. The
// predicted pose of every member is kept for export and inspection.
struct ClusterAssignment {
    double t = 0.0;
    std::vector<int> users;
    std::vector<int> labels;
    std::vector<double> x, y, heading;
    ClusterMethod method = ClusterMethod::DBSCAN;
    double eps_or_threshold = 0.0;
    FeatureMode mode = FeatureMode::PositionSinCos;

    int n_clusters() const;
};

struct MergeStep {
    int a = 0; // smallest original index in each merged cluster, a < b
    int b = 0;
    double delta = 0.0; // Ward merge cost (squared scale)
};

struct HierarchicalResult {
    ClusterAssignment assignment;
    std::vector<MergeStep> merges;
};

std::vector<FeatureVector> normalize_features(const std::vector<PredictionRecord>& records,
                                              const NormalizationConfig& cfg);

// Ward merge cost between two disjoint clusters given their sizes and
// centroids: |A||B|/(|A|+|B|) * squared centroid distance.
double ward_merge_distance(int size_a, const std::vector<double>& centroid_a, int size_b,
                           const std::vector<double>& centroid_b);

// Euclidean DBSCAN, neighborhood inclusive of the eps boundary. With
// min_pts 1 every point is core and clusters are exactly the connected
// components of the eps graph. Labels are numbered by first appearance.
ClusterAssignment dbscan(const std::vector<FeatureVector>& points, double eps, int min_pts);

// Greedy Ward agglomeration with Lance-Williams updates. Merging stops
// when the smallest sqrt(delta) exceeds the threshold; equal costs break
// toward the lowest representative index pair.
HierarchicalResult hierarchical_cluster(const std::vector<FeatureVector>& points,
                                        double threshold);

// Splits the records into per-instant groups (exact t match), normalizes
// and clusters each one. Instants are independent, so with parallel set
// they are processed across threads; output order is by time either way.
std::vector<ClusterAssignment> cluster_timeline(const std::vector<PredictionRecord>& records,
                                                const NormalizationConfig& norm,
                                                const ClusterParams& params,
                                                bool parallel = true);

void export_assignments_csv(const std::string& path,
                            const std::vector<ClusterAssignment>& assignments);

} // namespace srsgroup

#endif
