#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgood/augment.hpp"
#include "sgood/encoder.hpp"
#include "sgood/oodscore.hpp"

namespace sgood {

struct TrainConfig {
  int batch_size = 128;       // B, >= 2
  int pretrain_epochs = 100;  // T_PT
  int finetune_epochs = 500;  // T_FT
  double alpha = 0.1;
  double tau = 0.5;
  double lr_pretrain = 0.001;
  double lr_finetune = 0.001;
  double augment_ratio = 0.3;
  std::uint64_t seed = 1;
};

struct TrainReport {
  std::vector<double> pretrain_cl;
  std::vector<double> finetune_ce;
  std::vector<double> finetune_cl;
  std::vector<double> finetune_total;
  std::vector<double> val_accuracy;
  int best_epoch = -1;  // 1-based fine-tuning epoch of the retained checkpoint
  double best_val_accuracy = 0.0;
  double wall_clock_sec = 0.0;
  std::uint64_t seed = 0;
};

// Normalized-temperature cross entropy over two views (rows of u0/u1 must be
// unit norm). For anchor (i, a) the positive is the other view of graph i;
// the denominator sums both views of every other graph, 2(B-1) terms. Mean
// over the 2B anchors.
NodeId ntxent_loss(Tape& tape, NodeId u0, NodeId u1, double tau);

// Mean over the batch of -log softmax(logits)[label].
NodeId cross_entropy_loss(Tape& tape, NodeId logits, std::vector<int> labels);

double combined_loss(double ce, double cl, double alpha);

// Substructure detection for every graph of a dataset.
struct PartitionSet {
  std::string detector;  // "modularity" or "lp"
  std::vector<Partition> partitions;
  std::vector<SuperGraph> supers;
};

PartitionSet compute_partitions(const GraphDataset& dataset, const std::string& detector,
                                std::uint64_t seed);

// Stage one: minimize the contrastive loss alone for pretrain_epochs.
ParamSet pretrain_stage(const GraphDataset& dataset, std::span<const int> train_idx,
                        const PartitionSet& parts, ParamSet params, const EncoderConfig& enc,
                        const TrainConfig& cfg, TrainReport& report);

// Stage two: minimize CE + alpha * CL; tracks validation ID accuracy per
// epoch and returns the best-validation checkpoint.
ParamSet finetune_stage(const GraphDataset& dataset, const Splits& splits,
                        const PartitionSet& parts, ParamSet params, const EncoderConfig& enc,
                        const TrainConfig& cfg, TrainReport& report);

struct TrainedModel {
  ParamSet params;
  EncoderConfig encoder;
  GaussianStats stats;
  TrainReport report;
};

// Both stages followed by Gaussian estimation over the ID training
// embeddings. Only ID training data is touched.
TrainedModel train(const GraphDataset& dataset, const Splits& splits, const PartitionSet& parts,
                   EncoderConfig enc, const TrainConfig& cfg);

// Scoring embedding of one graph under the trained encoder.
Tensor scoring_embedding(const Graph& g, const Partition& p, const SuperGraph& s,
                         const ParamSet& params, const EncoderConfig& enc);

}  // namespace sgood
