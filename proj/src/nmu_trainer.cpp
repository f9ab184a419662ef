#include "att/nmu_trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "att/errors.hpp"
#include "att/evaluation.hpp"
#include "att/parallel.hpp"

namespace att {

std::string to_string(TrainMode mode) {
  return mode == TrainMode::att ? "att" : "baseline";
}

TrainMode parse_train_mode(const std::string& text) {
  if (text == "att") return TrainMode::att;
  if (text == "baseline") return TrainMode::baseline;
  throw std::invalid_argument("unknown train mode '" + text + "'");
}

std::string to_string(Termination t) {
  return t == Termination::tolerance ? "tolerance" : "max_epochs";
}

nlohmann::json report_to_json(const TrainReport& r) {
  nlohmann::json doc;
  doc["epochs_run"] = r.epochs_run;
  doc["per_epoch_rmse"] = r.per_epoch_rmse;
  doc["per_epoch_mae"] = r.per_epoch_mae;
  doc["per_epoch_h"] = r.per_epoch_h;
  doc["cr_rmse"] = r.cr_rmse;
  doc["cr_mae"] = r.cr_mae;
  doc["termination"] = to_string(r.termination);
  doc["final_hp"] = {{"lambda", r.final_hp.lambda}, {"lambda_b", r.final_hp.lambda_b}};
  if (r.adapt) {
    doc["best_lambda"] = r.adapt->best.lambda;
    doc["best_lambda_b"] = r.adapt->best.lambda_b;
    doc["population"] = r.adapt->population;
    doc["best_rule"] = r.adapt->best_rule;
    doc["tau_h"] = r.adapt->tau_h;
  }
  return doc;
}

namespace {

// Numerator/denominator pairs for one parameter block, row-major.
struct Ratio {
  std::vector<double> num;
  std::vector<double> den;
  explicit Ratio(std::size_t n = 0) : num(n, 0.0), den(n, 0.0) {}
};

void require_finite(const Ratio& r, const char* block) {
  for (std::size_t p = 0; p < r.num.size(); ++p)
    if (!std::isfinite(r.num[p]) || !std::isfinite(r.den[p]))
      throw DivergenceError(std::string("non-finite accumulator in block ") + block +
                            " at element " + std::to_string(p));
}

double apply_ratio(double theta, double num, double den, double floor) {
  return theta * num / std::max(den, floor);
}

// Every numerator/denominator of one epoch, computed from a fixed model.
struct EpochTerms {
  Ratio s, u, z, a, c, e, w;
  std::vector<char> temporal_reached;
  bool learn_weights = false;
};

EpochTerms accumulate(const FactorModel& m, const SparseTensor& train,
                      const HyperParams& hp, const TrainConfig& config) {
  const std::size_t n_nodes = m.n_nodes();
  const std::size_t n_slots = m.n_slots();
  const std::size_t rank = m.rank();
  const unsigned threads = config.threads;
  const auto entries = train.entries();

  const TemporalCache cache = compute_temporal(m);
  std::vector<double> pred(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) pred[p] = predict_unchecked(m, cache, entries[p]);
  });

  EpochTerms t;

  // Sender side: s_id and a_i over Omega(i).
  t.s = Ratio(n_nodes * rank);
  t.a = Ratio(n_nodes);
  parallel_for(n_nodes, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto s = m.S.row(i);
      for (std::size_t pos : train.by_sender(i)) {
        const ObservedEntry& x = entries[pos];
        const auto u = m.U.row(x.j);
        const auto z = cache.z_hat.row(x.k);
        for (std::size_t d = 0; d < rank; ++d) {
          const double uz = u[d] * z[d];
          t.s.num[i * rank + d] += x.value * uz;
          t.s.den[i * rank + d] += pred[pos] * uz + hp.lambda * s[d];
        }
        t.a.num[i] += x.value;
        t.a.den[i] += pred[pos] + hp.lambda_b * m.a[i];
      }
    }
  });

  // Receiver side: u_jd and c_j over Omega(j).
  t.u = Ratio(n_nodes * rank);
  t.c = Ratio(n_nodes);
  parallel_for(n_nodes, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      const auto u = m.U.row(j);
      for (std::size_t pos : train.by_receiver(j)) {
        const ObservedEntry& x = entries[pos];
        const auto s = m.S.row(x.i);
        const auto z = cache.z_hat.row(x.k);
        for (std::size_t d = 0; d < rank; ++d) {
          const double sz = s[d] * z[d];
          t.u.num[j * rank + d] += x.value * sz;
          t.u.den[j * rank + d] += pred[pos] * sz + hp.lambda * u[d];
        }
        t.c.num[j] += x.value;
        t.c.den[j] += pred[pos] + hp.lambda_b * m.c[j];
      }
    }
  });

  // Per-slot sums over Omega(k); every temporal parameter is a weighted
  // combination of these.
  Ratio slot_z(n_slots * rank), slot_e(n_slots);
  parallel_for(n_slots, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const auto zh = cache.z_hat.row(k);
      for (std::size_t pos : train.by_slot(k)) {
        const ObservedEntry& x = entries[pos];
        const auto s = m.S.row(x.i);
        const auto u = m.U.row(x.j);
        for (std::size_t d = 0; d < rank; ++d) {
          const double su = s[d] * u[d];
          slot_z.num[k * rank + d] += x.value * su;
          slot_z.den[k * rank + d] += pred[pos] * su + hp.lambda * zh[d];
        }
        slot_e.num[k] += x.value;
        slot_e.den[k] += pred[pos] + hp.lambda_b * cache.e_hat[k];
      }
    }
  });

  // z_ld and e_l reach every slot k in [l, l + window] through w_kl.
  t.z = Ratio(n_slots * rank);
  t.e = Ratio(n_slots);
  t.temporal_reached.assign(n_slots, 0);
  for (std::size_t l = 0; l < n_slots; ++l) {
    for (std::size_t k = l; k < m.W.dependents_end(l); ++k) {
      const double w = m.W(k, l);
      if (w == 0.0 || train.by_slot(k).empty()) continue;
      t.temporal_reached[l] = 1;
      for (std::size_t d = 0; d < rank; ++d) {
        t.z.num[l * rank + d] += w * slot_z.num[k * rank + d];
        t.z.den[l * rank + d] += w * slot_z.den[k * rank + d];
      }
      t.e.num[l] += w * slot_e.num[k];
      t.e.den[l] += w * slot_e.den[k];
    }
  }

  // w_kl for admissible l < k, row-major over the band.
  t.learn_weights = config.mode == TrainMode::att;
  if (t.learn_weights) {
    t.w = Ratio(m.W.band_size());
    std::size_t p = 0;
    for (std::size_t k = 0; k < n_slots; ++k) {
      for (std::size_t l = m.W.band_begin(k); l < k; ++l, ++p) {
        const auto z = m.Z.row(l);
        for (std::size_t d = 0; d < rank; ++d) {
          t.w.num[p] += z[d] * slot_z.num[k * rank + d];
          t.w.den[p] += z[d] * slot_z.den[k * rank + d];
        }
        t.w.num[p] += m.e[l] * slot_e.num[k];
        t.w.den[p] += m.e[l] * slot_e.den[k];
      }
    }
  }
  return t;
}

}  // namespace

void nmu_epoch(FactorModel& m, const SparseTensor& train, const HyperParams& hp,
               const TrainConfig& config) {
  check_compatible(m, train);
  if (config.mode == TrainMode::baseline) m.W.reset_identity();
  const EpochTerms t = accumulate(m, train, hp, config);

  require_finite(t.s, "S");
  require_finite(t.u, "U");
  require_finite(t.z, "Z");
  require_finite(t.a, "a");
  require_finite(t.c, "c");
  require_finite(t.e, "e");
  require_finite(t.w, "W");

  const std::size_t rank = m.rank();
  const double floor = config.denom_floor;
  for (std::size_t i = 0; i < m.n_nodes(); ++i) {
    if (!train.by_sender(i).empty()) {
      for (std::size_t d = 0; d < rank; ++d)
        m.S(i, d) = apply_ratio(m.S(i, d), t.s.num[i * rank + d], t.s.den[i * rank + d], floor);
      m.a[i] = apply_ratio(m.a[i], t.a.num[i], t.a.den[i], floor);
    }
    if (!train.by_receiver(i).empty()) {
      for (std::size_t d = 0; d < rank; ++d)
        m.U(i, d) = apply_ratio(m.U(i, d), t.u.num[i * rank + d], t.u.den[i * rank + d], floor);
      m.c[i] = apply_ratio(m.c[i], t.c.num[i], t.c.den[i], floor);
    }
  }
  if (t.learn_weights) {
    std::size_t p = 0;
    for (std::size_t k = 0; k < m.n_slots(); ++k)
      for (std::size_t l = m.W.band_begin(k); l < k; ++l, ++p)
        if (!train.by_slot(k).empty())
          m.W.set(k, l, apply_ratio(m.W(k, l), t.w.num[p], t.w.den[p], floor));
  }
  for (std::size_t l = 0; l < m.n_slots(); ++l) {
    if (!t.temporal_reached[l]) continue;
    for (std::size_t d = 0; d < rank; ++d)
      m.Z(l, d) = apply_ratio(m.Z(l, d), t.z.num[l * rank + d], t.z.den[l * rank + d], floor);
    m.e[l] = apply_ratio(m.e[l], t.e.num[l], t.e.den[l], floor);
  }
}

std::vector<UpdateTerms> nmu_update_terms(const FactorModel& model,
                                          const SparseTensor& train,
                                          const HyperParams& hp,
                                          const TrainConfig& config) {
  using B = ParamAddress::Block;
  check_compatible(model, train);
  FactorModel frozen;
  const FactorModel* m = &model;
  if (config.mode == TrainMode::baseline) {
    frozen = model;
    frozen.W.reset_identity();
    m = &frozen;
  }
  const EpochTerms t = accumulate(*m, train, hp, config);
  const std::size_t rank = m->rank();

  std::vector<UpdateTerms> out;
  for (const ParamAddress& addr : all_parameters(*m)) {
    const std::size_t flat = addr.row * rank + addr.col;
    switch (addr.block) {
      case B::S:
        out.push_back({t.s.num[flat], t.s.den[flat], !train.by_sender(addr.row).empty()});
        break;
      case B::U:
        out.push_back({t.u.num[flat], t.u.den[flat], !train.by_receiver(addr.row).empty()});
        break;
      case B::Z:
        out.push_back({t.z.num[flat], t.z.den[flat], t.temporal_reached[addr.row] != 0});
        break;
      case B::a:
        out.push_back({t.a.num[addr.row], t.a.den[addr.row], !train.by_sender(addr.row).empty()});
        break;
      case B::c:
        out.push_back({t.c.num[addr.row], t.c.den[addr.row], !train.by_receiver(addr.row).empty()});
        break;
      case B::e:
        out.push_back({t.e.num[addr.row], t.e.den[addr.row], t.temporal_reached[addr.row] != 0});
        break;
      case B::W:
        out.push_back({});
        break;
    }
  }
  // W terms are laid out in band order, which is also all_parameters() order.
  if (t.learn_weights) {
    const std::size_t first_w = out.size() - t.w.num.size();
    std::size_t p = 0;
    for (std::size_t k = 0; k < m->n_slots(); ++k)
      for (std::size_t l = m->W.band_begin(k); l < k; ++l, ++p)
        out[first_w + p] = {t.w.num[p], t.w.den[p], !train.by_slot(k).empty()};
  }
  return out;
}

TrainReport train(FactorModel& model, const SparseTensor& train_set,
                  const SparseTensor& validation, const HyperParams& hp,
                  const TrainConfig& config) {
  if (validation.empty()) throw DataError("validation set is empty");
  if (config.max_epochs < 1) throw std::invalid_argument("max_epochs must be at least 1");
  if (!(config.tolerance >= 0.0))
    throw std::invalid_argument("tolerance must be nonnegative");
  check_compatible(model, validation);

  TrainReport report;
  report.final_hp = hp;
  report.termination = Termination::max_epochs;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    nmu_epoch(model, train_set, hp, config);
    const Metrics m = evaluate(model, validation);
    report.per_epoch_rmse.push_back(m.rmse);
    report.per_epoch_mae.push_back(m.mae);
    report.per_epoch_h.push_back(m.h);
    report.epochs_run = epoch;
    const auto& h = report.per_epoch_h;
    if (epoch >= 2 && std::abs(h[epoch - 1] - h[epoch - 2]) < config.tolerance) {
      report.termination = Termination::tolerance;
      break;
    }
  }
  report.cr_rmse = convergence_rounds(report.per_epoch_rmse, config.tolerance);
  report.cr_mae = convergence_rounds(report.per_epoch_mae, config.tolerance);
  return report;
}

std::string to_string(const ParamAddress& a) {
  static const char* names[] = {"S", "U", "Z", "a", "c", "e", "W"};
  std::string out = names[static_cast<int>(a.block)];
  out += "(" + std::to_string(a.row);
  switch (a.block) {
    case ParamAddress::Block::a:
    case ParamAddress::Block::c:
    case ParamAddress::Block::e:
      break;
    default:
      out += "," + std::to_string(a.col);
  }
  return out + ")";
}

std::vector<ParamAddress> all_parameters(const FactorModel& m) {
  using B = ParamAddress::Block;
  std::vector<ParamAddress> out;
  for (B block : {B::S, B::U})
    for (std::size_t r = 0; r < m.n_nodes(); ++r)
      for (std::size_t d = 0; d < m.rank(); ++d) out.push_back({block, r, d});
  for (std::size_t l = 0; l < m.n_slots(); ++l)
    for (std::size_t d = 0; d < m.rank(); ++d) out.push_back({B::Z, l, d});
  for (B block : {B::a, B::c})
    for (std::size_t r = 0; r < m.n_nodes(); ++r) out.push_back({block, r, 0});
  for (std::size_t l = 0; l < m.n_slots(); ++l) out.push_back({B::e, l, 0});
  for (std::size_t k = 0; k < m.n_slots(); ++k)
    for (std::size_t l = m.W.band_begin(k); l < k; ++l) out.push_back({B::W, k, l});
  return out;
}

namespace {

void check_address(const FactorModel& m, const ParamAddress& a) {
  using B = ParamAddress::Block;
  bool ok = false;
  switch (a.block) {
    case B::S:
    case B::U:
      ok = a.row < m.n_nodes() && a.col < m.rank();
      break;
    case B::Z:
      ok = a.row < m.n_slots() && a.col < m.rank();
      break;
    case B::a:
    case B::c:
      ok = a.row < m.n_nodes();
      break;
    case B::e:
      ok = a.row < m.n_slots();
      break;
    case B::W:
      ok = a.row < m.n_slots() && m.W.admissible(a.row, a.col);
      break;
  }
  if (!ok) throw std::out_of_range("inadmissible parameter " + to_string(a));
}

}  // namespace

double get_parameter(const FactorModel& m, const ParamAddress& a) {
  using B = ParamAddress::Block;
  check_address(m, a);
  switch (a.block) {
    case B::S: return m.S(a.row, a.col);
    case B::U: return m.U(a.row, a.col);
    case B::Z: return m.Z(a.row, a.col);
    case B::a: return m.a[a.row];
    case B::c: return m.c[a.row];
    case B::e: return m.e[a.row];
    case B::W: return m.W(a.row, a.col);
  }
  return 0.0;
}

void set_parameter(FactorModel& m, const ParamAddress& a, double value) {
  using B = ParamAddress::Block;
  check_address(m, a);
  switch (a.block) {
    case B::S: m.S(a.row, a.col) = value; break;
    case B::U: m.U(a.row, a.col) = value; break;
    case B::Z: m.Z(a.row, a.col) = value; break;
    case B::a: m.a[a.row] = value; break;
    case B::c: m.c[a.row] = value; break;
    case B::e: m.e[a.row] = value; break;
    case B::W: m.W.set(a.row, a.col, value); break;
  }
}

double analytic_gradient(const FactorModel& m, const SparseTensor& entries,
                         const HyperParams& hp, const ParamAddress& addr) {
  using B = ParamAddress::Block;
  check_address(m, addr);
  check_compatible(m, entries);
  const TemporalCache cache = compute_temporal(m);
  const auto residual = [&](std::size_t pos) {
    return entries[pos].value - predict_unchecked(m, cache, entries[pos]);
  };
  const std::size_t d = addr.col;

  double g = 0.0;
  switch (addr.block) {
    case B::S:
      for (std::size_t pos : entries.by_sender(addr.row)) {
        const auto& x = entries[pos];
        g += -residual(pos) * m.U(x.j, d) * cache.z_hat(x.k, d) +
             hp.lambda * m.S(addr.row, d);
      }
      break;
    case B::U:
      for (std::size_t pos : entries.by_receiver(addr.row)) {
        const auto& x = entries[pos];
        g += -residual(pos) * m.S(x.i, d) * cache.z_hat(x.k, d) +
             hp.lambda * m.U(addr.row, d);
      }
      break;
    case B::a:
      for (std::size_t pos : entries.by_sender(addr.row))
        g += -residual(pos) + hp.lambda_b * m.a[addr.row];
      break;
    case B::c:
      for (std::size_t pos : entries.by_receiver(addr.row))
        g += -residual(pos) + hp.lambda_b * m.c[addr.row];
      break;
    case B::Z: {
      const std::size_t l = addr.row;
      for (std::size_t k = l; k < m.W.dependents_end(l); ++k) {
        double inner = 0.0;
        for (std::size_t pos : entries.by_slot(k)) {
          const auto& x = entries[pos];
          inner += -residual(pos) * m.S(x.i, d) * m.U(x.j, d) +
                   hp.lambda * cache.z_hat(k, d);
        }
        g += inner * m.W(k, l);
      }
      break;
    }
    case B::e: {
      const std::size_t l = addr.row;
      for (std::size_t k = l; k < m.W.dependents_end(l); ++k) {
        double inner = 0.0;
        for (std::size_t pos : entries.by_slot(k))
          inner += -residual(pos) + hp.lambda_b * cache.e_hat[k];
        g += inner * m.W(k, l);
      }
      break;
    }
    case B::W: {
      const std::size_t k = addr.row, l = addr.col;
      for (std::size_t pos : entries.by_slot(k)) {
        const auto& x = entries[pos];
        const double r = residual(pos);
        for (std::size_t q = 0; q < m.rank(); ++q)
          g += (-r * m.S(x.i, q) * m.U(x.j, q) + hp.lambda * cache.z_hat(k, q)) *
               m.Z(l, q);
        g += (-r + hp.lambda_b * cache.e_hat[k]) * m.e[l];
      }
      break;
    }
  }
  return g;
}

}  // namespace att
