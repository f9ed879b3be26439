#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sgood/tensor.hpp"

namespace sgood {

// z = concat(h_node, h_super) / ||concat||_2. h_super may be empty (node-only
// models). Throws on a zero-norm concatenation.
Tensor embed_for_scoring(const Tensor& h_node, const Tensor& h_super);

// Class centroids and tied covariance of the ID training embeddings. The
// inverse is taken on covariance + ridge * I.
struct GaussianStats {
  std::vector<Tensor> centroids;  // one 1 x dim row per class
  Tensor covariance;              // dim x dim
  Tensor covariance_inv;
  double ridge = 0.0;

  int dim() const { return covariance.rows; }
  int classes() const { return static_cast<int>(centroids.size()); }
};

// Tied covariance: (1/N) sum over classes and members of the centered outer
// products. Ridge = 1e-6 * trace / dim, floored at 1e-10. Throws on an empty
// class or a matrix the Cholesky factorization cannot handle even with ridge.
GaussianStats estimate_gaussian(std::span<const Tensor> embeds, std::span<const int> labels,
                                int num_classes);

void save_gaussian_stats(const GaussianStats& stats, const std::filesystem::path& file);
GaussianStats load_gaussian_stats(const std::filesystem::path& file);

enum class ScoreMode {
  NearestCentroid,  // min over classes (default)
  LiteralMax,       // max over classes
};

// Quadratic form (z - mu_c)^T Sigma^-1 (z - mu_c), reduced over classes per
// mode. Low scores mean ID.
double mahalanobis_score(const Tensor& z, const GaussianStats& stats,
                         ScoreMode mode = ScoreMode::NearestCentroid);

// Smallest lambda such that at least `target` of the ID scores are <= lambda.
double threshold_at_tpr(std::span<const double> id_scores, double target = 0.95);

// OOD is the positive class; higher score = more OOD. Ties get average-rank
// treatment (0.5 credit per tied pair).
double auroc(std::span<const double> scores, std::span<const std::uint8_t> is_ood);

// Average precision over the descending score sweep.
double aupr(std::span<const double> scores, std::span<const std::uint8_t> is_ood);

// False positive rate on ID at the largest threshold whose OOD TPR (flagging
// S >= threshold) is at least 0.95.
double fpr95(std::span<const double> scores, std::span<const std::uint8_t> is_ood);

// Argmax match rate of logits (N x C) against labels.
double id_accuracy(const Tensor& logits, std::span<const int> labels);

struct ScoredGraph {
  int graph_id = 0;
  double score = 0.0;
  std::uint8_t is_ood = 0;
  int predicted_class = 0;
};

struct ScoredSet {
  std::vector<ScoredGraph> items;

  std::vector<double> scores() const;
  std::vector<std::uint8_t> ood_mask() const;
};

void write_scores_csv(const ScoredSet& set, const std::filesystem::path& file);

}  // namespace sgood
