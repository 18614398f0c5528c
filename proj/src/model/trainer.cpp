#include "s2st/model/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "s2st/error.hpp"

namespace s2st::model {

using namespace s2st::ad;

Trainer::Trainer(Model& model, const TrainSchedule& sched, std::uint64_t seed)
    : model_(model), sched_(sched), seed_(seed), adam_(sched.lr) {}

std::vector<const synth::ParallelUtterance*> Trainer::next_batch(const synth::Corpus& corpus) {
  const std::size_t n = corpus.train.size();
  if (n == 0) throw Error("trainer: empty corpus");
  if (cursor_ + sched_.batch_size > order_.size()) {
    order_.resize(n);
    for (std::size_t i = 0; i < n; ++i) order_[i] = i;
    Rng rng(hash_mix(seed_, hash_mix(0x9a7cULL, epoch_)));
    rng.shuffle(order_);
    // bucket by source length (stable within the shuffled order)
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      auto band = [&](std::size_t i) { return corpus.train[i].src.size() / 4; };
      return band(a) < band(b);
    });
    cursor_ = 0;
    ++epoch_;
  }
  std::vector<const synth::ParallelUtterance*> batch;
  const std::size_t take = std::min(sched_.batch_size, order_.size());
  for (std::size_t i = 0; i < take; ++i) batch.push_back(&corpus.train[order_[cursor_ + i]]);
  cursor_ += take;
  return batch;
}

StepRecord Trainer::step(const std::vector<const synth::ParallelUtterance*>& batch,
                         const StageObjective& obj, std::size_t step_index) {
  const std::size_t n = batch.size();
  if (n == 0) throw Error("trainer: empty batch");
  model_.decoder().lora_enabled = obj.stage >= 2;

  // infeasible-CTC utterances are excluded from the corresponding mean
  std::size_t n_src = 0, n_tgt = 0;
  for (const auto* utt : batch) {
    if (model_.src_ctc_feasible(*utt)) ++n_src;
    if (model_.tgt_ctc_feasible(*utt)) ++n_tgt;
  }
  const double w_ce = 1.0 / static_cast<double>(n);
  const double w_cls = sched_.classifier_weight / static_cast<double>(n);
  const double w_src = n_src ? obj.lambda_src / static_cast<double>(n_src) : 0.0;
  const double w_tgt = n_tgt ? obj.lambda_tgt / static_cast<double>(n_tgt) : 0.0;

  for (Param* p : model_.all_params()) p->zero_grad();

  std::vector<std::unique_ptr<Graph>> graphs(n);
  std::vector<double> ce_v(n, 0.0), src_v(n, 0.0), tgt_v(n, 0.0), cls_v(n, 0.0);
  std::vector<char> src_ok(n, 0), tgt_ok(n, 0);
  std::string worker_error;

#pragma omp parallel for schedule(dynamic)
  for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    try {
      graphs[i] = std::make_unique<Graph>();
      Graph& g = *graphs[i];
      Rng dropout_rng(hash_mix(hash_mix(seed_, step_index), batch[i]->id));
      UttLosses losses =
          model_.forward_utterance(g, *batch[i], /*train_mode=*/true, &dropout_rng);
      Var total = scale(losses.ce, w_ce);
      total = add(total, scale(losses.classifier_ce, w_cls));
      if (losses.ctc_src) {
        total = add(total, scale(*losses.ctc_src, w_src));
        src_v[i] = losses.ctc_src->value().item();
        src_ok[i] = 1;
      }
      if (losses.ctc_tgt) {
        total = add(total, scale(*losses.ctc_tgt, w_tgt));
        tgt_v[i] = losses.ctc_tgt->value().item();
        tgt_ok[i] = 1;
      }
      ce_v[i] = losses.ce.value().item();
      cls_v[i] = losses.classifier_ce.value().item();
      g.backward(total);
    } catch (const std::exception& e) {
#pragma omp critical
      if (worker_error.empty()) worker_error = e.what();
    }
  }
  if (!worker_error.empty()) throw Error("trainer: " + worker_error);

  // fixed-order reduction keeps updates deterministic
  for (std::size_t i = 0; i < n; ++i) graphs[i]->accumulate_param_grads(1.0);

  StepRecord rec;
  rec.step = step_index;
  rec.stage = obj.stage;
  double cls_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rec.ce += ce_v[i] / static_cast<double>(n);
    cls_mean += cls_v[i] / static_cast<double>(n);
    if (src_ok[i]) rec.ctc_src += src_v[i] / static_cast<double>(n_src);
    if (tgt_ok[i]) rec.ctc_tgt += tgt_v[i] / static_cast<double>(n_tgt);
  }
  rec.total = stage_loss(rec.ce, rec.ctc_src, rec.ctc_tgt, obj) +
              sched_.classifier_weight * cls_mean;
  if (!std::isfinite(rec.total))
    throw DivergenceError("training diverged at step " + std::to_string(step_index) +
                          " (stage " + std::to_string(obj.stage) + "): total loss " +
                          std::to_string(rec.total));

  adam_.step(model_.trainable_params(obj.stage));
  return rec;
}

std::vector<StepRecord> Trainer::run(const synth::Corpus& corpus) {
  std::vector<StepRecord> records;
  std::size_t global = 0;
  for (std::size_t s = 0; s < sched_.stage1_steps; ++s)
    records.push_back(step(next_batch(corpus), sched_.stage1, global++));
  for (std::size_t s = 0; s < sched_.stage2_steps; ++s)
    records.push_back(step(next_batch(corpus), sched_.stage2, global++));
  return records;
}

}  // namespace s2st::model
