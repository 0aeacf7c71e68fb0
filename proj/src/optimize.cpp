#include "latpinn/optimize.hpp"

#include <cmath>
#include <ostream>

#include "latpinn/format.hpp"

namespace latpinn::optimize {

AdamState::AdamState(std::size_t parameter_count, AdamConfig config)
    : config_(config), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0) || !(config.beta2 >= 0.0 && config.beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(config.lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

void AdamState::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("Adam step: parameter/gradient length mismatch");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericalError("non-finite gradient at parameter " + std::to_string(i) +
                               " (step " + std::to_string(steps_ + 1) + ")",
                           -1);
    }
  }
  ++steps_;
  const auto& c = config_;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = c.beta1 * m_[i] + (1.0 - c.beta1) * grads[i];
    v_[i] = c.beta2 * v_[i] + (1.0 - c.beta2) * grads[i] * grads[i];
    const double m_hat = m_[i] / bc1;
    const double v_hat = v_[i] / bc2;
    params[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

std::vector<LossBreakdown> train_loop(std::vector<double>& params, const Objective& objective,
                                      long epochs, AdamState& state) {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  std::vector<LossBreakdown> history;
  history.reserve(static_cast<std::size_t>(epochs));
  for (long epoch = 0; epoch < epochs; ++epoch) {
    LossEvaluation eval = objective(params);
    if (!std::isfinite(eval.loss.total)) {
      throw NumericalError("non-finite loss at epoch " + std::to_string(epoch), epoch);
    }
    history.push_back(eval.loss);
    try {
      state.step(params, eval.gradient);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at epoch " + std::to_string(epoch), epoch);
    }
  }
  return history;
}

void write_history_csv(std::ostream& out, std::span<const LossBreakdown> history) {
  out << "epoch,data_loss,physics_loss,init_loss,boundary_loss,total_loss\n";
  for (std::size_t e = 0; e < history.size(); ++e) {
    const auto& h = history[e];
    out << e << ',' << fmt_double(h.data) << ',' << fmt_double(h.physics) << ','
        << fmt_double(h.initial) << ',' << fmt_double(h.boundary) << ',' << fmt_double(h.total)
        << '\n';
  }
}

}  // namespace latpinn::optimize
