#include "sgood/oodscore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace sgood {

namespace {

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
Tensor cholesky(const Tensor& a) {
  const int n = a.rows;
  Tensor l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a.at(i, j);
      for (int k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
      if (i == j) {
        if (s <= 0.0) throw std::runtime_error("estimate_gaussian: covariance not positive definite");
        l.at(i, i) = std::sqrt(s);
      } else {
        l.at(i, j) = s / l.at(j, j);
      }
    }
  }
  return l;
}

// Inverse via Cholesky: solve L L^T X = I column by column.
Tensor spd_inverse(const Tensor& a) {
  const int n = a.rows;
  const Tensor l = cholesky(a);
  Tensor inv(n, n);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int col = 0; col < n; ++col) {
    for (int i = 0; i < n; ++i) {
      double s = i == col ? 1.0 : 0.0;
      for (int k = 0; k < i; ++k) s -= l.at(i, k) * y[k];
      y[i] = s / l.at(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = i + 1; k < n; ++k) s -= l.at(k, i) * inv.at(k, col);
      inv.at(i, col) = s / l.at(i, i);
    }
  }
  return inv;
}

}  // namespace

Tensor embed_for_scoring(const Tensor& h_node, const Tensor& h_super) {
  if (h_node.rows != 1 || (h_super.size() > 0 && h_super.rows != 1)) {
    throw std::invalid_argument("embed_for_scoring: expects single-row embeddings");
  }
  Tensor z(1, h_node.cols + h_super.cols);
  std::copy(h_node.data.begin(), h_node.data.end(), z.data.begin());
  std::copy(h_super.data.begin(), h_super.data.end(), z.data.begin() + h_node.cols);
  double norm = 0.0;
  for (const double v : z.data) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw std::runtime_error("embed_for_scoring: zero-norm embedding");
  for (double& v : z.data) v /= norm;
  return z;
}

GaussianStats estimate_gaussian(std::span<const Tensor> embeds, std::span<const int> labels,
                                int num_classes) {
  if (embeds.empty()) throw std::invalid_argument("estimate_gaussian: no embeddings");
  if (embeds.size() != labels.size()) {
    throw std::invalid_argument("estimate_gaussian: embedding/label count mismatch");
  }
  const int dim = embeds.front().cols;
  const int n = static_cast<int>(embeds.size());

  GaussianStats stats;
  stats.centroids.assign(static_cast<std::size_t>(num_classes), Tensor(1, dim));
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (int i = 0; i < n; ++i) {
    const int c = labels[i];
    if (c < 0 || c >= num_classes) throw std::invalid_argument("estimate_gaussian: label out of range");
    if (embeds[i].cols != dim || embeds[i].rows != 1) {
      throw std::invalid_argument("estimate_gaussian: inconsistent embedding shape");
    }
    ++counts[c];
    for (int k = 0; k < dim; ++k) stats.centroids[c].data[k] += embeds[i].data[k];
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) throw std::invalid_argument("estimate_gaussian: empty class");
    for (double& v : stats.centroids[c].data) v /= counts[c];
  }

  stats.covariance = Tensor(dim, dim);
  std::vector<double> centered(static_cast<std::size_t>(dim));
  for (int i = 0; i < n; ++i) {
    const Tensor& mu = stats.centroids[labels[i]];
    for (int k = 0; k < dim; ++k) centered[k] = embeds[i].data[k] - mu.data[k];
    for (int r = 0; r < dim; ++r) {
      if (centered[r] == 0.0) continue;
      for (int c = 0; c < dim; ++c) stats.covariance.at(r, c) += centered[r] * centered[c];
    }
  }
  for (double& v : stats.covariance.data) v /= n;

  double trace = 0.0;
  for (int k = 0; k < dim; ++k) trace += stats.covariance.at(k, k);
  stats.ridge = std::max(1e-6 * trace / dim, 1e-10);

  Tensor ridged = stats.covariance;
  for (int k = 0; k < dim; ++k) ridged.at(k, k) += stats.ridge;
  stats.covariance_inv = spd_inverse(ridged);
  return stats;
}

double mahalanobis_score(const Tensor& z, const GaussianStats& stats, ScoreMode mode) {
  if (z.cols != stats.dim() || z.rows != 1) {
    throw std::invalid_argument("mahalanobis_score: embedding width mismatch");
  }
  const int dim = stats.dim();
  double best = 0.0;
  bool first = true;
  std::vector<double> diff(static_cast<std::size_t>(dim));
  for (const Tensor& mu : stats.centroids) {
    for (int k = 0; k < dim; ++k) diff[k] = z.data[k] - mu.data[k];
    double q = 0.0;
    for (int r = 0; r < dim; ++r) {
      if (diff[r] == 0.0) continue;
      double s = 0.0;
      for (int c = 0; c < dim; ++c) s += stats.covariance_inv.at(r, c) * diff[c];
      q += diff[r] * s;
    }
    if (first) {
      best = q;
      first = false;
    } else if (mode == ScoreMode::NearestCentroid ? q < best : q > best) {
      best = q;
    }
  }
  return best;
}

double threshold_at_tpr(std::span<const double> id_scores, double target) {
  if (id_scores.empty()) throw std::invalid_argument("threshold_at_tpr: no scores");
  std::vector<double> sorted(id_scores.begin(), id_scores.end());
  std::sort(sorted.begin(), sorted.end());
  const int n = static_cast<int>(sorted.size());
  const int need = static_cast<int>(std::ceil(target * n));
  return sorted[std::max(need - 1, 0)];
}

double auroc(std::span<const double> scores, std::span<const std::uint8_t> is_ood) {
  if (scores.size() != is_ood.size()) throw std::invalid_argument("auroc: size mismatch");
  const int n = static_cast<int>(scores.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] < scores[b]; });

  // average ranks over tie groups; ranks are half-integers, exact in double
  double rank_sum_pos = 0.0;
  std::int64_t n_pos = 0;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (int k = i; k < j; ++k) {
      if (is_ood[order[k]]) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::int64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("auroc: needs both classes");
  const double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double aupr(std::span<const double> scores, std::span<const std::uint8_t> is_ood) {
  if (scores.size() != is_ood.size()) throw std::invalid_argument("aupr: size mismatch");
  const int n = static_cast<int>(scores.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  std::int64_t total_pos = 0;
  for (const auto v : is_ood) total_pos += v ? 1 : 0;
  if (total_pos == 0 || total_pos == n) throw std::invalid_argument("aupr: needs both classes");

  // step-wise average precision over distinct thresholds
  double ap = 0.0;
  double prev_recall = 0.0;
  std::int64_t tp = 0;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (int k = i; k < j; ++k) tp += is_ood[order[k]] ? 1 : 0;
    const double precision = static_cast<double>(tp) / static_cast<double>(j);
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double fpr95(std::span<const double> scores, std::span<const std::uint8_t> is_ood) {
  if (scores.size() != is_ood.size()) throw std::invalid_argument("fpr95: size mismatch");
  std::vector<double> ood_scores;
  std::vector<double> id_scores;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (is_ood[i] ? ood_scores : id_scores).push_back(scores[i]);
  }
  if (ood_scores.empty() || id_scores.empty()) {
    throw std::invalid_argument("fpr95: needs both classes");
  }
  // largest threshold t with #(ood >= t) / n_ood >= 0.95: the k-th largest
  // OOD score, k = ceil(0.95 n_ood)
  std::sort(ood_scores.begin(), ood_scores.end(), std::greater<>());
  const int k = static_cast<int>(std::ceil(0.95 * static_cast<double>(ood_scores.size())));
  const double threshold = ood_scores[std::max(k - 1, 0)];
  std::int64_t fp = 0;
  for (const double s : id_scores) {
    if (s >= threshold) ++fp;
  }
  return static_cast<double>(fp) / static_cast<double>(id_scores.size());
}

double id_accuracy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rows != static_cast<int>(labels.size())) {
    throw std::invalid_argument("id_accuracy: row/label count mismatch");
  }
  if (logits.rows == 0) throw std::invalid_argument("id_accuracy: empty input");
  int correct = 0;
  for (int r = 0; r < logits.rows; ++r) {
    int best = 0;
    for (int c = 1; c < logits.cols; ++c) {
      if (logits.at(r, c) > logits.at(r, best)) best = c;
    }
    if (best == labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows);
}

std::vector<double> ScoredSet::scores() const {
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.score);
  return out;
}

std::vector<std::uint8_t> ScoredSet::ood_mask() const {
  std::vector<std::uint8_t> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.is_ood);
  return out;
}

void write_scores_csv(const ScoredSet& set, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("write_scores_csv: cannot open " + file.string());
  out << "graph_id,score,is_ood,predicted_class\n";
  char buf[64];
  for (const auto& it : set.items) {
    std::snprintf(buf, sizeof(buf), "%.10g", it.score);
    out << it.graph_id << "," << buf << "," << static_cast<int>(it.is_ood) << ","
        << it.predicted_class << "\n";
  }
}

namespace {

void write_tensor(std::ofstream& out, const Tensor& t) {
  const std::uint32_t rows = static_cast<std::uint32_t>(t.rows);
  const std::uint32_t cols = static_cast<std::uint32_t>(t.cols);
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  out.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

Tensor read_tensor(std::ifstream& in) {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!in) throw std::runtime_error("load_gaussian_stats: truncated file");
  Tensor t(static_cast<int>(rows), static_cast<int>(cols));
  in.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  if (!in) throw std::runtime_error("load_gaussian_stats: truncated file");
  return t;
}

constexpr char kStatsMagic[4] = {'S', 'G', 'G', 'S'};

}  // namespace

void save_gaussian_stats(const GaussianStats& stats, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("save_gaussian_stats: cannot open " + file.string());
  out.write(kStatsMagic, 4);
  const std::uint32_t version = 1;
  const std::uint32_t classes = static_cast<std::uint32_t>(stats.classes());
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&classes), sizeof(classes));
  out.write(reinterpret_cast<const char*>(&stats.ridge), sizeof(stats.ridge));
  for (const auto& mu : stats.centroids) write_tensor(out, mu);
  write_tensor(out, stats.covariance);
  write_tensor(out, stats.covariance_inv);
}

GaussianStats load_gaussian_stats(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("load_gaussian_stats: cannot open " + file.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kStatsMagic, 4) != 0) {
    throw std::runtime_error("load_gaussian_stats: bad magic");
  }
  std::uint32_t version = 0;
  std::uint32_t classes = 0;
  GaussianStats stats;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&classes), sizeof(classes));
  in.read(reinterpret_cast<char*>(&stats.ridge), sizeof(stats.ridge));
  if (!in || version != 1) throw std::runtime_error("load_gaussian_stats: unsupported file");
  for (std::uint32_t c = 0; c < classes; ++c) stats.centroids.push_back(read_tensor(in));
  stats.covariance = read_tensor(in);
  stats.covariance_inv = read_tensor(in);
  return stats;
}

}  // namespace sgood
