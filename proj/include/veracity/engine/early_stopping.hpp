#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

namespace veracity::engine {

// Stop after `patience` consecutive epochs without a strict improvement of
// the best validation loss. Epochs are 1-indexed.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {
    if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  }

  // Feed the loss observed at the end of an epoch; returns true when
  // training should stop.
  bool update(double loss) {
    ++epoch_;
    if (loss < best_loss_) {
      best_loss_ = loss;
      best_epoch_ = epoch_;
      since_improve_ = 0;
      return false;
    }
    ++since_improve_;
    return since_improve_ >= patience_;
  }

  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }
  int epochs_seen() const { return epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int since_improve_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

struct EarlyStopDecision {
  bool stop = false;
  int best_epoch = 0;   // 1-indexed epoch with the lowest loss
  int stop_epoch = 0;   // epoch after which stopping triggered (0 if none)
};

inline EarlyStopDecision early_stopping(const std::vector<double>& history,
                                        int patience) {
  EarlyStopping stopper(patience);
  EarlyStopDecision d;
  for (double loss : history) {
    if (stopper.update(loss)) {
      d.stop = true;
      d.stop_epoch = stopper.epochs_seen();
      break;
    }
  }
  d.best_epoch = stopper.best_epoch();
  return d;
}

}  // namespace veracity::engine
