#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace latpinn {

/// Raised when a loss or gradient stops being finite. Carries the epoch
/// (0-based) at which it happened, or -1 outside a training loop.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, long epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  long epoch() const { return epoch_; }

 private:
  long epoch_;
};

}  // namespace latpinn

namespace latpinn::optimize {

/// One epoch's loss terms. Unused terms stay 0.
/// Invariant: total == data + lambda * physics + initial + boundary.
struct LossBreakdown {
  double data = 0.0;
  double physics = 0.0;
  double initial = 0.0;
  double boundary = 0.0;
  double total = 0.0;
  double lambda = 1.0;
};

struct LossEvaluation {
  LossBreakdown loss;
  std::vector<double> gradient;
};

using Objective = std::function<LossEvaluation(std::span<const double>)>;

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamState {
 public:
  AdamState(std::size_t parameter_count, AdamConfig config = {});

  /// One bias-corrected Adam update in place. Throws NumericalError (and
  /// leaves params and moments untouched) if any gradient entry is not finite.
  void step(std::span<double> params, std::span<const double> grads);

  long step_count() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamConfig config_;
  long steps_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// Full-batch training: each epoch evaluates the objective at the current
/// parameters, records the breakdown, then takes one Adam step. Returns the
/// per-epoch history (length == epochs). Throws std::invalid_argument for
/// epochs < 1 and NumericalError on a non-finite loss.
std::vector<LossBreakdown> train_loop(std::vector<double>& params, const Objective& objective,
                                      long epochs, AdamState& state);

/// CSV with columns epoch,data_loss,physics_loss,init_loss,boundary_loss,total_loss.
void write_history_csv(std::ostream& out, std::span<const LossBreakdown> history);

}  // namespace latpinn::optimize
