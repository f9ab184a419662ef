#ifndef ATT_NMU_TRAINER_HPP_
#define ATT_NMU_TRAINER_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "att/factor_model.hpp"
#include "att/sparse_tensor.hpp"

namespace att {

enum class TrainMode {
  att,       // temporal weights are learned
  baseline,  // temporal weights frozen to the identity
};

struct TrainConfig {
  std::size_t max_epochs = 1000;
  double tolerance = 1e-5;
  TrainMode mode = TrainMode::att;
  double denom_floor = 1e-12;
  // Worker threads for the per-index reductions. Every reduction sums a
  // fixed bucket in a fixed order, so results do not depend on this value.
  unsigned threads = 1;
};

enum class Termination { tolerance, max_epochs };

/// Extra fields recorded by the hyperparameter-adaptive trainer.
struct AdaptSummary {
  HyperParams best;
  std::size_t population = 0;
  std::string best_rule;
  std::vector<double> tau_h;  // recorded H of the global best, per iteration
};

struct TrainReport {
  std::size_t epochs_run = 0;
  std::vector<double> per_epoch_rmse;  // validation
  std::vector<double> per_epoch_mae;
  std::vector<double> per_epoch_h;
  std::size_t cr_rmse = 0;
  std::size_t cr_mae = 0;
  Termination termination = Termination::max_epochs;
  HyperParams final_hp;
  std::optional<AdaptSummary> adapt;
};

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& text);
std::string to_string(Termination t);

nlohmann::json report_to_json(const TrainReport& report);

/**
 * One simultaneous multiplicative update of every parameter over `train`.
 *
 * Predictions and all numerator/denominator sums are taken from the model as
 * it is on entry; the new values are applied only after every sum is
 * complete. Each parameter becomes theta * num / max(den, denom_floor), where
 * num collects the positive part of the gradient and den the negative part
 * plus regularization, so nonnegative parameters stay nonnegative. Parameters
 * that no training entry reaches are left untouched.
 *
 * In baseline mode the temporal weights are reset to the identity and not
 * updated.
 *
 * Throws DivergenceError, leaving the model unchanged, when any sum is not
 * finite.
 */
void nmu_epoch(FactorModel& model, const SparseTensor& train, const HyperParams& hp,
               const TrainConfig& config = {});

struct UpdateTerms {
  double num = 0.0;
  double den = 0.0;
  bool reached = false;  // false: no training entry informs this parameter
};

/// The multiplicative ratio nmu_epoch would apply to every coordinate, in
/// all_parameters() order. num - den equals minus the objective gradient.
std::vector<UpdateTerms> nmu_update_terms(const FactorModel& model,
                                          const SparseTensor& train,
                                          const HyperParams& hp,
                                          const TrainConfig& config = {});

// Repeats nmu_epoch, scoring the validation set after every epoch, until
// the validation H changes by less than config.tolerance between two
// consecutive epochs or config.max_epochs is reached.
TrainReport train(FactorModel& model, const SparseTensor& train,
                  const SparseTensor& validation, const HyperParams& hp,
                  const TrainConfig& config = {});

/// Address of one scalar parameter.
struct ParamAddress {
  enum class Block { S, U, Z, a, c, e, W };
  Block block = Block::S;
  std::size_t row = 0;  // i, j, l, or k for W
  std::size_t col = 0;  // d, or l for W; unused for biases

  friend bool operator==(const ParamAddress&, const ParamAddress&) = default;
};

std::string to_string(const ParamAddress& addr);

// Every learnable coordinate, including the admissible band of W.
std::vector<ParamAddress> all_parameters(const FactorModel& model);
double get_parameter(const FactorModel& model, const ParamAddress& addr);
void set_parameter(FactorModel& model, const ParamAddress& addr, double value);

// Partial derivative of objective() with respect to one coordinate. Throws
// std::out_of_range for an inadmissible address (e.g. a W element on or
// above the diagonal, or outside the band).
double analytic_gradient(const FactorModel& model, const SparseTensor& entries,
                         const HyperParams& hp, const ParamAddress& addr);

}  // namespace att

#endif  // ATT_NMU_TRAINER_HPP_
