#ifndef PFOLIO_LEARNERS_HPP
#define PFOLIO_LEARNERS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "pfolio/matrix.hpp"

namespace pfolio {

// ---------------------------------------------------------------------------
// Linear and kernel regression

struct RidgeModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;

  double predict(std::span<const double> x) const;
};

// Minimizes squared error plus lambda * ||w||^2; the intercept is not
// regularized. With lambda = 0 a rank-deficient system is an error.
RidgeModel train_ridge(const Matrix& X, std::span<const double> y,
                       double lambda);

struct KernelRidgeModel {
  Matrix support;  // training rows
  std::vector<double> alpha;
  double gamma = 1.0;
  double lambda = 0.0;

  // prediction = sum_i alpha_i * exp(-gamma * ||x - x_i||^2)
  double predict(std::span<const double> x) const;
};

KernelRidgeModel train_kernel_ridge(const Matrix& X, std::span<const double> y,
                                    double gamma, double lambda);

// ---------------------------------------------------------------------------
// Nearest neighbors

// Indices of the k training rows closest to `query` in Euclidean distance,
// ordered by (distance, row index) ascending.
std::vector<std::size_t> nearest_neighbors(const Matrix& rows,
                                           std::span<const double> query,
                                           std::size_t k);

// ---------------------------------------------------------------------------
// K-means

struct KMeansModel {
  Matrix centroids;
  double inertia = 0.0;

  // Nearest centroid by squared Euclidean distance, ties to lower index.
  std::size_t assign(std::span<const double> x) const;
};

// K-means++ seeding followed by Lloyd iterations until the assignment is a
// fixpoint or max_iters is reached. Empty clusters are reseeded to the point
// farthest from its current centroid. Per-iteration inertia values are
// appended to *inertia_trace when given.
KMeansModel train_kmeans(const Matrix& X, std::size_t k, std::uint64_t seed,
                         std::size_t max_iters = 100,
                         std::vector<double>* inertia_trace = nullptr);

// ---------------------------------------------------------------------------
// Cost-sensitive random forest of binary decision trees

struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
  };
  std::vector<Node> nodes;

  int predict(std::span<const double> x) const;
};

struct ForestParams {
  std::size_t n_trees = 99;  // odd, avoids vote ties
  std::size_t max_depth = 16;
  std::size_t min_leaf = 1;
  std::size_t features_per_split = 0;  // 0 = ceil(sqrt(n_features))
};

struct CostSensitiveForest {
  std::vector<DecisionTree> trees;

  // Unweighted majority vote over trees; exact ties predict label 0.
  int predict(std::span<const double> x) const;
};

// Each tree is grown on a bootstrap sample with per-example weights; splits
// greedily maximize the weighted Gini impurity reduction over a random
// feature subset. Tree t draws from seed + t, so serial and parallel
// training produce identical forests.
CostSensitiveForest train_forest(const Matrix& X, std::span<const int> labels,
                                 std::span<const double> weights,
                                 const ForestParams& params,
                                 std::uint64_t seed, std::size_t jobs = 1);

}  // namespace pfolio

#endif
