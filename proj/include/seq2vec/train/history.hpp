#pragma once

#include <vector>

namespace seq2vec::train {

struct Checkpoint {
  int index = 0;
  long batches = 0;        // batches seen when the checkpoint was taken
  double loss = 0.0;       // mean batch loss since the previous checkpoint
  double lr = 0.0;         // learning rate used over that window
  double elapsed_seconds = 0.0;
};

struct TrainHistory {
  std::vector<Checkpoint> checkpoints;
  int best_checkpoint = -1;
  bool stopped_early = false;  // patience exhausted (as opposed to hitting a cap)
};

}  // namespace seq2vec::train
