#ifndef POSTCLUST_CLUSTERING_HPP
#define POSTCLUST_CLUSTERING_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "postclust/model.hpp"

namespace postclust {

enum class Linkage { single, average, centroid, ward };

Linkage linkage_from_string(const std::string& name);
std::string to_string(Linkage l);

// One agglomeration step. Cluster ids: observations are 0..n-1, the cluster
// created by step l (0-based) is n+l. left < right always.
struct Merge {
    int left;
    int right;
    double height; // linkage distance over squared Euclidean base distances
};

struct MergeSequence {
    int n = 0;
    Linkage linkage = Linkage::average;
    std::vector<Merge> merges; // n-1 entries
};

// Partition labels. Entries are 0..K-1 and every label occurs.
struct ClusterLabels {
    std::vector<int> labels;
    int K = 0;

    std::vector<std::vector<int>> groups() const;
};

// Greedy agglomeration over squared Euclidean distances with
// Lance-Williams updates. At each step the alive pair with minimum
// linkage distance merges; ties break toward the lexicographically
// smallest (older id, younger id) pair.
MergeSequence hierarchical(const DataMatrix& x, Linkage linkage);

// Undoes the last K-1 merges; components are labelled in order of their
// smallest member index.
ClusterLabels cut_dendrogram(const MergeSequence& m, int K);

// Full per-iteration history of a seeded Lloyd's run. assignments[t] is the
// n-vector of cluster ids after the (t+1)-th assignment step; when the run
// converged the last two vectors are identical.
struct KMeansTrace {
    int K = 0;
    std::uint64_t seed = 0;
    std::vector<int> init_rows;                 // K distinct observation indices
    std::vector<std::vector<int>> assignments;  // each of length n, entries 0..K-1
    std::vector<std::pair<int, int>> carried;   // (assignment step t >= 1, cluster): empty cluster
                                                // kept its previous centroid for that step
    bool converged = false;

    // Number of assignment steps recorded (initial assignment included).
    int steps() const { return static_cast<int>(assignments.size()); }
};

// Lloyd's algorithm: initial centroids are K data rows sampled without
// replacement from a generator seeded with `seed`; assignment ties break
// toward the lowest cluster index; a cluster that loses all members keeps
// its previous centroid. Stops when assignments repeat or after t_max
// centroid updates.
KMeansTrace kmeans_lloyd(const DataMatrix& x, int K, int t_max, std::uint64_t seed);

// Final assignment with unused cluster ids compacted away.
ClusterLabels kmeans_labels(const KMeansTrace& trace);

// Within-cluster sum of squares about the label-group means.
double within_cluster_ss(const DataMatrix& x, const std::vector<int>& labels);

// Lance-Williams update for the linkage distance between the union A+B and
// another cluster C, over squared Euclidean base distances. Linear in the
// distances except for single linkage's min term. Shared with the truncation
// machinery, which propagates quadratic coefficients through it.
double lance_williams(Linkage linkage, double d_ac, double d_bc, double d_ab,
                      double size_a, double size_b, double size_c);

} // namespace postclust

#endif
