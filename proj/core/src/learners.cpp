#include "pfolio/learners.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pfolio/errors.hpp"
#include "pfolio/parallel.hpp"
#include "pfolio/random.hpp"

namespace pfolio {

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) out(i, j) = m.at(i, j);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Ridge regression

double RidgeModel::predict(std::span<const double> x) const {
  double value = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) value += weights[j] * x[j];
  return value;
}

RidgeModel train_ridge(const Matrix& X, std::span<const double> y,
                       double lambda) {
  if (X.rows == 0 || X.rows != y.size()) {
    throw ValidationError("ridge training needs matching, nonempty X and y");
  }
  if (lambda < 0.0) throw ValidationError("lambda must be >= 0");
  const auto n = static_cast<Eigen::Index>(X.rows);
  const auto d = static_cast<Eigen::Index>(X.cols);
  Eigen::MatrixXd A = to_eigen(X);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) b(i) = y[static_cast<std::size_t>(i)];

  // Centering keeps the intercept out of the penalty term.
  Eigen::RowVectorXd x_mean = A.colwise().mean();
  double y_mean = b.mean();
  A.rowwise() -= x_mean;
  b.array() -= y_mean;

  Eigen::MatrixXd gram = A.transpose() * A;
  gram.diagonal().array() += lambda;
  Eigen::VectorXd rhs = A.transpose() * b;

  Eigen::VectorXd w(d);
  if (lambda == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) {
      throw ValidationError("singular system; increase regularization");
    }
    w = lu.solve(rhs);
  } else {
    w = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(rhs);
  }

  RidgeModel model;
  model.lambda = lambda;
  model.weights.assign(w.data(), w.data() + d);
  model.intercept = y_mean - x_mean.dot(w);
  return model;
}

// ---------------------------------------------------------------------------
// Kernel ridge regression (RBF)

double KernelRidgeModel::predict(std::span<const double> x) const {
  double value = 0.0;
  for (std::size_t i = 0; i < support.rows; ++i) {
    value += alpha[i] * std::exp(-gamma * squared_distance(x, support.row(i)));
  }
  return value;
}

KernelRidgeModel train_kernel_ridge(const Matrix& X, std::span<const double> y,
                                    double gamma, double lambda) {
  if (X.rows == 0 || X.rows != y.size()) {
    throw ValidationError("kernel ridge needs matching, nonempty X and y");
  }
  if (gamma <= 0.0) throw ValidationError("gamma must be positive");
  if (lambda < 0.0) throw ValidationError("lambda must be >= 0");
  const auto n = static_cast<Eigen::Index>(X.rows);
  Eigen::MatrixXd kernel(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kernel(i, i) = 1.0 + lambda;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double k = std::exp(-gamma * squared_distance(
                                       X.row(static_cast<std::size_t>(i)),
                                       X.row(static_cast<std::size_t>(j))));
      kernel(i, j) = k;
      kernel(j, i) = k;
    }
  }
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) b(i) = y[static_cast<std::size_t>(i)];

  Eigen::LLT<Eigen::MatrixXd> llt(kernel);
  if (llt.info() != Eigen::Success) {
    if (lambda == 0.0) {
      throw ValidationError("singular kernel system; increase regularization");
    }
    throw ValidationError("kernel system could not be factorized");
  }
  Eigen::VectorXd alpha = llt.solve(b);

  KernelRidgeModel model;
  model.support = X;
  model.gamma = gamma;
  model.lambda = lambda;
  model.alpha.assign(alpha.data(), alpha.data() + n);
  return model;
}

// ---------------------------------------------------------------------------
// Nearest neighbors

std::vector<std::size_t> nearest_neighbors(const Matrix& rows,
                                           std::span<const double> query,
                                           std::size_t k) {
  if (k == 0) throw ValidationError("k must be positive");
  if (k > rows.rows) throw ValidationError("k exceeds number of rows");
  std::vector<std::pair<double, std::size_t>> order(rows.rows);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    order[i] = {squared_distance(query, rows.row(i)), i};
  }
  std::sort(order.begin(), order.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = order[i].second;
  return out;
}

// ---------------------------------------------------------------------------
// K-means

std::size_t KMeansModel::assign(std::span<const double> x) const {
  std::size_t best = 0;
  double best_d = squared_distance(x, centroids.row(0));
  for (std::size_t c = 1; c < centroids.rows; ++c) {
    double d = squared_distance(x, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

KMeansModel train_kmeans(const Matrix& X, std::size_t k, std::uint64_t seed,
                         std::size_t max_iters,
                         std::vector<double>* inertia_trace) {
  if (k == 0 || k > X.rows) {
    throw ValidationError("k must be in 1..n_rows");
  }
  const std::size_t n = X.rows;
  Rng rng(seed);

  // K-means++ seeding.
  KMeansModel model;
  model.centroids = Matrix(k, X.cols);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = uniform_index(rng, n);
  std::copy(X.row(first).begin(), X.row(first).end(),
            model.centroids.row(0).begin());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(X.row(i),
                                               model.centroids.row(c - 1)));
      total += d2[i];
    }
    std::size_t pick;
    if (total > 0.0) {
      double r = uniform01(rng) * total;
      pick = n - 1;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (r < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = uniform_index(rng, n);
    }
    std::copy(X.row(pick).begin(), X.row(pick).end(),
              model.centroids.row(c).begin());
  }

  std::vector<std::size_t> assignment(n, k);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    // Assignment step.
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t c = model.assign(X.row(i));
      inertia += squared_distance(X.row(i), model.centroids.row(c));
      if (c != assignment[i]) {
        assignment[i] = c;
        changed = true;
      }
    }
    model.inertia = inertia;
    if (inertia_trace != nullptr) inertia_trace->push_back(inertia);
    if (!changed) break;

    // Mean step.
    Matrix sums(k, X.cols);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = sums.row(assignment[i]);
      for (std::size_t j = 0; j < X.cols; ++j) row[j] += X.at(i, j);
      ++counts[assignment[i]];
    }
    std::vector<std::uint8_t> reseeded(n, 0);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < X.cols; ++j) {
          model.centroids.at(c, j) =
              sums.at(c, j) / static_cast<double>(counts[c]);
        }
      } else {
        // Reseed an empty cluster to the point farthest from its centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (reseeded[i]) continue;
          double d = squared_distance(X.row(i),
                                      model.centroids.row(assignment[i]));
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        reseeded[far] = 1;
        std::copy(X.row(far).begin(), X.row(far).end(),
                  model.centroids.row(c).begin());
      }
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Cost-sensitive random forest

int DecisionTree::predict(std::span<const double> x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const Node& n = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left
                                                                : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].label;
}

int CostSensitiveForest::predict(std::span<const double> x) const {
  std::size_t ones = 0;
  for (const auto& tree : trees) {
    ones += static_cast<std::size_t>(tree.predict(x));
  }
  return 2 * ones > trees.size() ? 1 : 0;
}

namespace {

struct TreeBuilder {
  const Matrix& X;
  std::span<const int> labels;
  std::span<const double> weights;
  const ForestParams& params;
  std::size_t features_per_split;
  Rng rng;
  DecisionTree tree;
  std::vector<std::size_t> feature_pool;

  TreeBuilder(const Matrix& x, std::span<const int> l,
              std::span<const double> w, const ForestParams& p,
              std::uint64_t seed)
      : X(x), labels(l), weights(w), params(p), rng(seed) {
    features_per_split = p.features_per_split > 0
                             ? std::min(p.features_per_split, X.cols)
                             : static_cast<std::size_t>(
                                   std::ceil(std::sqrt(
                                       static_cast<double>(X.cols))));
    feature_pool.resize(X.cols);
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
  }

  static double gini(double w0, double w1) {
    double total = w0 + w1;
    if (total <= 0.0) return 0.0;
    double p0 = w0 / total;
    double p1 = w1 / total;
    return 1.0 - p0 * p0 - p1 * p1;
  }

  int build(std::vector<std::size_t>& sample, std::size_t depth) {
    double w0 = 0.0, w1 = 0.0;
    for (std::size_t i : sample) {
      (labels[i] == 1 ? w1 : w0) += weights[i];
    }
    int leaf_label = w1 > w0 ? 1 : 0;

    bool stop = depth >= params.max_depth || w0 == 0.0 || w1 == 0.0 ||
                sample.size() < 2 * params.min_leaf;
    if (!stop) {
      auto [feature, threshold, gain] = best_split(sample, w0, w1);
      if (gain > 0.0) {
        std::vector<std::size_t> left, right;
        for (std::size_t i : sample) {
          (X.at(i, feature) < threshold ? left : right).push_back(i);
        }
        if (left.size() >= params.min_leaf && right.size() >= params.min_leaf) {
          int node = static_cast<int>(tree.nodes.size());
          tree.nodes.emplace_back();
          tree.nodes[static_cast<std::size_t>(node)].feature =
              static_cast<int>(feature);
          tree.nodes[static_cast<std::size_t>(node)].threshold = threshold;
          sample.clear();
          sample.shrink_to_fit();
          int l = build(left, depth + 1);
          int r = build(right, depth + 1);
          tree.nodes[static_cast<std::size_t>(node)].left = l;
          tree.nodes[static_cast<std::size_t>(node)].right = r;
          return node;
        }
      }
    }

    int node = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<std::size_t>(node)].label = leaf_label;
    return node;
  }

  // Returns (feature, threshold, gain); gain <= 0 when no split helps.
  std::tuple<std::size_t, double, double> best_split(
      const std::vector<std::size_t>& sample, double w0, double w1) {
    // Random feature subset via partial Fisher-Yates.
    for (std::size_t i = 0; i < features_per_split; ++i) {
      std::size_t j = i + uniform_index(rng, feature_pool.size() - i);
      std::swap(feature_pool[i], feature_pool[j]);
    }

    const double parent_impurity = gini(w0, w1);
    const double total = w0 + w1;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    double best_gain = 0.0;

    std::vector<std::tuple<double, int, double>> column;  // value,label,weight
    column.reserve(sample.size());
    for (std::size_t fi = 0; fi < features_per_split; ++fi) {
      std::size_t feature = feature_pool[fi];
      column.clear();
      for (std::size_t i : sample) {
        column.emplace_back(X.at(i, feature), labels[i], weights[i]);
      }
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) {
                  return std::get<0>(a) < std::get<0>(b);
                });
      double left0 = 0.0, left1 = 0.0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        (std::get<1>(column[i]) == 1 ? left1 : left0) +=
            std::get<2>(column[i]);
        double v = std::get<0>(column[i]);
        double next = std::get<0>(column[i + 1]);
        if (v == next) continue;
        double right0 = w0 - left0;
        double right1 = w1 - left1;
        double wl = left0 + left1;
        double wr = right0 + right1;
        double gain = parent_impurity - (wl / total) * gini(left0, left1) -
                      (wr / total) * gini(right0, right1);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = feature;
          best_threshold = 0.5 * (v + next);
        }
      }
    }
    return {best_feature, best_threshold, best_gain};
  }
};

}  // namespace

CostSensitiveForest train_forest(const Matrix& X, std::span<const int> labels,
                                 std::span<const double> weights,
                                 const ForestParams& params,
                                 std::uint64_t seed, std::size_t jobs) {
  const std::size_t n = X.rows;
  if (n == 0 || labels.size() != n || weights.size() != n) {
    throw ValidationError("forest training needs matching, nonempty inputs");
  }
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ValidationError("labels must be 0 or 1");
    }
    if (weights[i] < 0.0) throw ValidationError("weights must be >= 0");
    weight_sum += weights[i];
  }
  if (weight_sum <= 0.0) throw ValidationError("all example weights are zero");

  CostSensitiveForest forest;
  forest.trees.resize(params.n_trees);
  parallel_for(params.n_trees, jobs, [&](std::size_t t) {
    TreeBuilder builder(X, labels, weights, params, seed + t);
    std::vector<std::size_t> sample(n);
    for (std::size_t i = 0; i < n; ++i) {
      sample[i] = uniform_index(builder.rng, n);
    }
    builder.build(sample, 0);
    forest.trees[t] = std::move(builder.tree);
  });
  return forest;
}

}  // namespace pfolio
