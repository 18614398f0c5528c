#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "s2st/core/optim.hpp"
#include "s2st/model/model.hpp"

namespace s2st::model {

struct TrainSchedule {
  std::size_t stage1_steps = 500;
  std::size_t stage2_steps = 500;
  std::size_t batch_size = 16;
  double lr = 3e-4;
  StageObjective stage1 = StageObjective::stage1();
  StageObjective stage2 = StageObjective::stage2();
  double classifier_weight = 0.1;
};

struct StepRecord {
  std::size_t step = 0;
  int stage = 1;
  double ce = 0.0;
  double ctc_src = 0.0;
  double ctc_tgt = 0.0;
  double total = 0.0;
};

/// Two-stage training driver. Per-utterance forward/backward fan out to OpenMP
/// workers; gradients are reduced serially in batch order, so results are
/// bitwise identical for any thread count. Aborts with DivergenceError when a
/// loss goes non-finite.
class Trainer {
 public:
  Trainer(Model& model, const TrainSchedule& sched, std::uint64_t seed);

  /// Runs stage I then stage II per the schedule; returns one record per step.
  std::vector<StepRecord> run(const synth::Corpus& corpus);

  StepRecord step(const std::vector<const synth::ParallelUtterance*>& batch,
                  const StageObjective& obj, std::size_t step_index);

 private:
  std::vector<const synth::ParallelUtterance*> next_batch(const synth::Corpus& corpus);

  Model& model_;
  TrainSchedule sched_;
  std::uint64_t seed_;
  ad::Adam adam_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
};

}  // namespace s2st::model
