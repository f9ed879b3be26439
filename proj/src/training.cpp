#include "sgood/training.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sgood/adam.hpp"

namespace sgood {

namespace {

// Seeded shuffle into batches of cfg.batch_size; a trailing batch of one
// graph is folded into its predecessor so every batch has >= 2 graphs.
std::vector<std::vector<int>> make_batches(std::span<const int> indices, int batch_size,
                                           Rng& rng) {
  std::vector<int> order(indices.begin(), indices.end());
  rng.shuffle(order);
  std::vector<std::vector<int>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t end = std::min(order.size(), i + batch_size);
    batches.emplace_back(order.begin() + i, order.begin() + end);
  }
  if (batches.size() >= 2 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back()[0]);
    batches.pop_back();
  }
  return batches;
}

std::map<std::string, Tensor> collect_grads(const Tape& tape, const ParamNodes& nodes) {
  std::map<std::string, Tensor> grads;
  for (const auto& [name, id] : nodes.ids) grads.emplace(name, tape.grad(id));
  return grads;
}

struct ViewBatch {
  std::vector<AugmentedPair> views0;
  std::vector<AugmentedPair> views1;
};

ViewBatch make_views(const GraphDataset& dataset, std::span<const int> batch,
                     const PartitionSet& parts, const SubstitutionPools& pools, double ratio,
                     Rng& rng) {
  ViewBatch out;
  out.views0.reserve(batch.size());
  out.views1.reserve(batch.size());
  static const std::vector<Fragment> kNoPool;
  for (const int idx : batch) {
    const Graph& g = dataset.graphs[idx];
    const int cls = g.label.value_or(0);
    const auto& pool = cls < static_cast<int>(pools.by_class.size()) ? pools.by_class[cls] : kNoPool;
    auto [v0, v1] = sample_view_pair(g, parts.partitions[idx], parts.supers[idx], pool, ratio, rng);
    out.views0.push_back(std::move(v0));
    out.views1.push_back(std::move(v1));
  }
  return out;
}

SuperBatch batch_of_views(const std::vector<AugmentedPair>& views, bool with_super) {
  std::vector<GraphRef> refs;
  refs.reserve(views.size());
  for (const auto& v : views) refs.push_back({&v.graph, &v.partition, &v.super_graph});
  return make_super_batch(refs, with_super);
}

SuperBatch batch_of_indices(const GraphDataset& dataset, std::span<const int> indices,
                            const PartitionSet& parts, bool with_super) {
  std::vector<GraphRef> refs;
  refs.reserve(indices.size());
  for (const int idx : indices) {
    refs.push_back({&dataset.graphs[idx], &parts.partitions[idx], &parts.supers[idx]});
  }
  return make_super_batch(refs, with_super);
}

// Projected unit embeddings of two augmented views.
std::pair<NodeId, NodeId> view_projections(Tape& tape, const ViewBatch& views,
                                           const ParamNodes& p, const EncoderConfig& enc) {
  const SuperBatch b0 = batch_of_views(views.views0, enc.super_branch);
  const SuperBatch b1 = batch_of_views(views.views1, enc.super_branch);
  const EncodeNodes e0 = encode_batch(tape, b0, p, enc);
  const EncodeNodes e1 = encode_batch(tape, b1, p, enc);
  return {project(tape, e0.h_for_heads, p), project(tape, e1.h_for_heads, p)};
}

double validation_accuracy(const GraphDataset& dataset, std::span<const int> val_idx,
                           const PartitionSet& parts, const ParamSet& params,
                           const EncoderConfig& enc) {
  if (val_idx.empty()) return 0.0;
  const SuperBatch batch = batch_of_indices(dataset, val_idx, parts, enc.super_branch);
  Tape tape;
  const ParamNodes p = register_params(tape, params);
  const EncodeNodes e = encode_batch(tape, batch, p, enc);
  std::vector<int> labels;
  labels.reserve(val_idx.size());
  for (const int idx : val_idx) labels.push_back(dataset.graphs[idx].label.value_or(0));
  return id_accuracy(tape.value(e.logits), labels);
}

}  // namespace

NodeId ntxent_loss(Tape& tape, NodeId u0, NodeId u1, double tau) {
  const Tensor& t0 = tape.value(u0);
  const Tensor& t1 = tape.value(u1);
  if (!t0.same_shape(t1)) throw std::invalid_argument("ntxent_loss: view shapes differ");
  const int b = t0.rows;
  if (b < 2) throw std::invalid_argument("ntxent_loss: needs at least two graphs");

  const std::array<NodeId, 2> views{u0, u1};
  const NodeId u = tape.concat_rows(views);  // 2B x d, graph of row i is i mod B
  const NodeId sim = tape.scale(tape.matmul(u, tape.transpose(u)), 1.0 / tau);

  // exclude both views of the anchor's own graph from the denominator
  Tensor mask(2 * b, 2 * b, 1.0);
  Tensor pos(2 * b, 2 * b, 0.0);
  for (int i = 0; i < 2 * b; ++i) {
    const int gi = i % b;
    mask.at(i, gi) = 0.0;
    mask.at(i, gi + b) = 0.0;
    pos.at(i, (i + b) % (2 * b)) = 1.0;
  }
  const NodeId masked_exp = tape.mul(tape.exp(sim), tape.input(std::move(mask)));
  const NodeId log_denom = tape.log(tape.sum_cols(masked_exp));
  const NodeId pos_sim = tape.sum_cols(tape.mul(sim, tape.input(std::move(pos))));
  const NodeId per_anchor = tape.add(log_denom, tape.scale(pos_sim, -1.0));
  return tape.scale(tape.sum_all(per_anchor), 1.0 / (2.0 * b));
}

NodeId cross_entropy_loss(Tape& tape, NodeId logits, std::vector<int> labels) {
  return tape.softmax_cross_entropy(logits, std::move(labels));
}

double combined_loss(double ce, double cl, double alpha) { return ce + alpha * cl; }

PartitionSet compute_partitions(const GraphDataset& dataset, const std::string& detector,
                                std::uint64_t seed) {
  PartitionSet out;
  out.detector = detector;
  out.partitions.reserve(dataset.graphs.size());
  out.supers.reserve(dataset.graphs.size());
  for (std::size_t i = 0; i < dataset.graphs.size(); ++i) {
    const Graph& g = dataset.graphs[i];
    Partition p;
    if (detector == "modularity") {
      p = detect_substructures_modularity(g);
    } else if (detector == "lp") {
      p = detect_substructures_lp(g, derive_seed(seed, "lp/" + std::to_string(i)));
    } else {
      throw std::invalid_argument("compute_partitions: unknown detector " + detector);
    }
    out.supers.push_back(build_super_graph(g, p));
    out.partitions.push_back(std::move(p));
  }
  return out;
}

ParamSet pretrain_stage(const GraphDataset& dataset, std::span<const int> train_idx,
                        const PartitionSet& parts, ParamSet params, const EncoderConfig& enc,
                        const TrainConfig& cfg, TrainReport& report) {
  Rng shuffle_rng(derive_seed(cfg.seed, "pretrain/shuffle"));
  Rng aug_rng(derive_seed(cfg.seed, "pretrain/augment"));
  AdamState adam;
  const AdamConfig adam_cfg{.lr = cfg.lr_pretrain};

  for (int epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
    const SubstitutionPools pools = build_pools(dataset, train_idx, parts.partitions);
    double epoch_loss = 0.0;
    int batches = 0;
    for (const auto& batch : make_batches(train_idx, cfg.batch_size, shuffle_rng)) {
      const ViewBatch views =
          make_views(dataset, batch, parts, pools, cfg.augment_ratio, aug_rng);
      Tape tape;
      const ParamNodes p = register_params(tape, params);
      const auto [proj0, proj1] = view_projections(tape, views, p, enc);
      const NodeId loss = ntxent_loss(tape, proj0, proj1, cfg.tau);
      tape.backward(loss);
      adam_step(params, collect_grads(tape, p), adam, adam_cfg);
      epoch_loss += tape.value(loss).data[0];
      ++batches;
    }
    report.pretrain_cl.push_back(batches > 0 ? epoch_loss / batches : 0.0);
  }
  return params;
}

ParamSet finetune_stage(const GraphDataset& dataset, const Splits& splits,
                        const PartitionSet& parts, ParamSet params, const EncoderConfig& enc,
                        const TrainConfig& cfg, TrainReport& report) {
  Rng shuffle_rng(derive_seed(cfg.seed, "finetune/shuffle"));
  Rng aug_rng(derive_seed(cfg.seed, "finetune/augment"));
  AdamState adam;
  const AdamConfig adam_cfg{.lr = cfg.lr_finetune};

  ParamSet best = params;
  report.best_epoch = -1;
  report.best_val_accuracy = -1.0;

  // alpha = 0 reduces to pure classification fine-tuning; the contrastive
  // path (and its rng draws) is skipped entirely.
  const bool use_cl = cfg.alpha != 0.0;

  for (int epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
    const SubstitutionPools pools =
        use_cl ? build_pools(dataset, splits.train, parts.partitions) : SubstitutionPools{};
    double ce_sum = 0.0;
    double cl_sum = 0.0;
    double total_sum = 0.0;
    int batches = 0;
    for (const auto& batch : make_batches(splits.train, cfg.batch_size, shuffle_rng)) {
      Tape tape;
      const ParamNodes p = register_params(tape, params);

      NodeId cl = -1;
      if (use_cl) {
        const ViewBatch views =
            make_views(dataset, batch, parts, pools, cfg.augment_ratio, aug_rng);
        const auto [proj0, proj1] = view_projections(tape, views, p, enc);
        cl = ntxent_loss(tape, proj0, proj1, cfg.tau);
      }

      const SuperBatch clean = batch_of_indices(dataset, batch, parts, enc.super_branch);
      const EncodeNodes e = encode_batch(tape, clean, p, enc);
      std::vector<int> labels;
      labels.reserve(batch.size());
      for (const int idx : batch) labels.push_back(dataset.graphs[idx].label.value_or(0));
      const NodeId ce = cross_entropy_loss(tape, e.logits, std::move(labels));

      const NodeId total = use_cl ? tape.add(ce, tape.scale(cl, cfg.alpha)) : ce;
      tape.backward(total);
      adam_step(params, collect_grads(tape, p), adam, adam_cfg);

      ce_sum += tape.value(ce).data[0];
      cl_sum += use_cl ? tape.value(cl).data[0] : 0.0;
      total_sum += tape.value(total).data[0];
      ++batches;
    }
    report.finetune_ce.push_back(batches > 0 ? ce_sum / batches : 0.0);
    report.finetune_cl.push_back(batches > 0 ? cl_sum / batches : 0.0);
    report.finetune_total.push_back(batches > 0 ? total_sum / batches : 0.0);

    const double acc = validation_accuracy(dataset, splits.val, parts, params, enc);
    report.val_accuracy.push_back(acc);
    if (acc > report.best_val_accuracy) {
      report.best_val_accuracy = acc;
      report.best_epoch = epoch + 1;
      best = params;
    }
  }
  return report.best_epoch < 0 ? params : best;
}

Tensor scoring_embedding(const Graph& g, const Partition& p, const SuperGraph& s,
                         const ParamSet& params, const EncoderConfig& enc) {
  const GraphEmbedding e = encode(g, p, s, params, enc);
  return embed_for_scoring(e.h_node, e.h_super);
}

TrainedModel train(const GraphDataset& dataset, const Splits& splits, const PartitionSet& parts,
                   EncoderConfig enc, const TrainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  enc.input_width = dataset.feature_width;
  enc.num_classes = dataset.num_classes;

  TrainedModel model;
  model.report.seed = cfg.seed;
  ParamSet params = init_model_params(enc, derive_seed(cfg.seed, "model-init"));
  params = pretrain_stage(dataset, splits.train, parts, std::move(params), enc, cfg, model.report);
  params = finetune_stage(dataset, splits, parts, std::move(params), enc, cfg, model.report);

  std::vector<Tensor> embeds;
  std::vector<int> labels;
  embeds.reserve(splits.train.size());
  for (const int idx : splits.train) {
    embeds.push_back(scoring_embedding(dataset.graphs[idx], parts.partitions[idx],
                                       parts.supers[idx], params, enc));
    labels.push_back(dataset.graphs[idx].label.value_or(0));
  }
  model.stats = estimate_gaussian(embeds, labels, enc.num_classes);
  model.params = std::move(params);
  model.encoder = enc;
  model.report.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return model;
}

}  // namespace sgood
