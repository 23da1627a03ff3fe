#include "lisal/joint.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include <ceres/ceres.h>

#include "lisal/error.hpp"
#include "lisal/gp.hpp"

namespace lisal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_state(const ObservationSet& data, ModelKind kind, const JointState& s) {
  if (s.fields.size() != latent_dimensions(kind)) {
    throw InvalidInput("joint state carries " + std::to_string(s.fields.size()) +
                       " latent fields, kind " + std::string(to_string(kind)) + " needs " +
                       std::to_string(latent_dimensions(kind)));
  }
  if (kind == ModelKind::kLeis && !s.globals.log_latent_length) {
    throw InvalidInput("LEIS state needs a latent length scale");
  }
  for (const auto& f : s.fields) f.validate();
  if (data.empty()) throw InvalidInput("joint objective needs at least one observation");
}

struct FieldTerms {
  Eigen::MatrixXd k_vm;  // K_z(X_V, X_M)
  Eigen::MatrixXd k_mm;  // K_z(X_M, X_M), no jitter
  std::optional<CholeskyFactor> chol;
  Eigen::VectorXd beta;  // (K_mm + jit^2 I)^{-1} z_M
  Eigen::VectorXd mean;  // z^m at the training points
  double lml = 0.0;
};

std::optional<FieldTerms> field_terms(const LatentField& f, const PointList& pts) {
  FieldTerms t;
  const StationaryKernel k = f.hypers.kernel();
  t.k_mm = cov_matrix(f.locations, k);
  Eigen::MatrixXd c = t.k_mm;
  const double jit = f.hypers.jitter_sd();
  c.diagonal().array() += jit * jit;
  t.chol = CholeskyFactor::try_compute(c);
  if (!t.chol) return std::nullopt;
  t.beta = t.chol->solve(f.values);
  t.k_vm = cov_matrix(pts, f.locations, k);
  t.mean = t.k_vm * t.beta;
  const double m = static_cast<double>(f.size());
  t.lml = -0.5 * f.values.dot(t.beta) - 0.5 * t.chol->log_det() - 0.5 * m * kLog2Pi;
  return t;
}

// d/d(log length_d) of the latent terms, given the gradient `g` of the data
// term with respect to the field's predictive mean at the training points.
std::array<double, 3> latent_length_gradient(const LatentField& f, const PointList& pts,
                                             const FieldTerms& t, const Eigen::VectorXd& g,
                                             const Eigen::VectorXd& u,
                                             const Eigen::MatrixXd& c_inv) {
  const auto len = f.hypers.lengths();
  const auto n = static_cast<Eigen::Index>(pts.size());
  const auto m = static_cast<Eigen::Index>(f.size());
  std::array<double, 3> out{};
  const auto delta2 = [](const Point& a, const Point& b, std::size_t d) {
    const double v = d == 0 ? a.x - b.x : (d == 1 ? a.y - b.y : a.t - b.t);
    return v * v;
  };
  for (std::size_t d = 0; d < 3; ++d) {
    const double inv = 1.0 / (len[d] * len[d]);
    double data_part = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      const Point& pk = f.locations[static_cast<std::size_t>(k)];
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += g[i] * t.k_vm(i, k) * delta2(pts[static_cast<std::size_t>(i)], pk, d);
      }
      data_part += acc * inv * t.beta[k];
    }
    Eigen::MatrixXd dc(m, m);
    for (Eigen::Index l = 0; l < m; ++l) {
      for (Eigen::Index k = 0; k < m; ++k) {
        dc(k, l) = t.k_mm(k, l) *
                   delta2(f.locations[static_cast<std::size_t>(k)], f.locations[static_cast<std::size_t>(l)], d) *
                   inv;
      }
    }
    const Eigen::VectorXd dc_beta = dc * t.beta;
    data_part -= u.dot(dc_beta);
    const double latent_part = 0.5 * t.beta.dot(dc_beta) - 0.5 * (c_inv.cwiseProduct(dc)).sum();
    out[d] = data_part + latent_part;
  }
  return out;
}

}  // namespace

JointObjective::JointObjective(const ObservationSet& data, ModelKind kind, JointState reference,
                               FreeParams free)
    : data_(data), kind_(kind), reference_(std::move(reference)) {
  check_state(data_, kind_, reference_);
  Eigen::Index pos = 0;
  bool values = false;
  const auto add = [&](bool is_free, Eigen::Index count) {
    for (Eigen::Index k = 0; k < count; ++k) {
      if (is_free) {
        free_index_.push_back(pos);
        free_is_value_.push_back(values);
      }
      ++pos;
    }
  };
  add(free.sigma_f, 1);
  add(free.sigma_n && std::isfinite(reference_.globals.log_sigma_n), 1);
  add(free.base, static_cast<Eigen::Index>(reference_.globals.base.num_params()));
  if (kind_ == ModelKind::kLeis) add(free.latent_length, 1);
  for (const auto& f : reference_.fields) {
    add(free.latent_lengths, 3);
    add(false, static_cast<Eigen::Index>(f.frozen_prefix));
    values = true;
    add(free.latent_values, static_cast<Eigen::Index>(f.size() - f.frozen_prefix));
    values = false;
  }
  full_size_ = pos;
}

Eigen::VectorXd JointObjective::full_vector(const JointState& s) const {
  Eigen::VectorXd v(full_size_);
  Eigen::Index pos = 0;
  v[pos++] = s.globals.log_sigma_f;
  v[pos++] = s.globals.log_sigma_n;
  for (double p : s.globals.base.log_params()) v[pos++] = p;
  if (kind_ == ModelKind::kLeis) v[pos++] = *s.globals.log_latent_length;
  for (const auto& f : s.fields) {
    for (double l : f.hypers.log_lengths) v[pos++] = l;
    v.segment(pos, f.values.size()) = f.values;
    pos += f.values.size();
  }
  return v;
}

JointState JointObjective::state_from_full(const Eigen::VectorXd& v) const {
  JointState s = reference_;
  Eigen::Index pos = 0;
  s.globals.log_sigma_f = v[pos++];
  s.globals.log_sigma_n = v[pos++];
  const auto nb = static_cast<Eigen::Index>(s.globals.base.num_params());
  s.globals.base = s.globals.base.with_log_params({v.data() + pos, static_cast<std::size_t>(nb)});
  pos += nb;
  if (kind_ == ModelKind::kLeis) s.globals.log_latent_length = v[pos++];
  for (auto& f : s.fields) {
    for (double& l : f.hypers.log_lengths) l = v[pos++];
    f.values = v.segment(pos, f.values.size());
    pos += f.values.size();
  }
  return s;
}

Eigen::VectorXd JointObjective::pack(const JointState& state) const {
  const Eigen::VectorXd full = full_vector(state);
  Eigen::VectorXd x(static_cast<Eigen::Index>(free_index_.size()));
  for (std::size_t k = 0; k < free_index_.size(); ++k) x[static_cast<Eigen::Index>(k)] = full[free_index_[k]];
  return x;
}

JointState JointObjective::unpack(const Eigen::VectorXd& x) const {
  Eigen::VectorXd full = full_vector(reference_);
  for (std::size_t k = 0; k < free_index_.size(); ++k) full[free_index_[k]] = x[static_cast<Eigen::Index>(k)];
  return state_from_full(full);
}

// Extreme parameter vectors (overflowing lengths and the like) are rejected
// like unfactorisable ones.
double JointObjective::value(const Eigen::VectorXd& x) const {
  try {
    return evaluate(unpack(x), nullptr);
  } catch (const Error&) {
    return kNegInf;
  }
}

double JointObjective::value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& gradient) const {
  Eigen::VectorXd full;
  double v = kNegInf;
  try {
    v = evaluate(unpack(x), &full);
  } catch (const Error&) {
  }
  gradient.resize(static_cast<Eigen::Index>(free_index_.size()));
  if (!std::isfinite(v)) {
    gradient.setZero();
    return v;
  }
  for (std::size_t k = 0; k < free_index_.size(); ++k) gradient[static_cast<Eigen::Index>(k)] = full[free_index_[k]];
  return v;
}

double JointObjective::evaluate(const JointState& s, Eigen::VectorXd* full_gradient) const {
  const PointList& pts = data_.points();
  const auto n = static_cast<Eigen::Index>(pts.size());
  const std::size_t nf = s.fields.size();

  std::vector<FieldTerms> terms;
  terms.reserve(nf);
  double total = 0.0;
  for (const auto& f : s.fields) {
    auto t = field_terms(f, pts);
    if (!t) return kNegInf;
    total += t->lml;
    terms.push_back(std::move(*t));
  }

  const KernelFamily family = s.globals.base.family();
  const double sf2 = std::exp(2.0 * s.globals.log_sigma_f);
  const double sn2 = std::exp(2.0 * s.globals.log_sigma_n);
  const auto axis = s.globals.base.axis_lengths();
  const double inv_len2[3] = {1.0 / (axis[0] * axis[0]), 1.0 / (axis[1] * axis[1]),
                              1.0 / (axis[2] * axis[2])};
  const double ll = kind_ == ModelKind::kLeis ? std::exp(*s.globals.log_latent_length) : 1.0;

  // Squared local length scales (PCLSK) at every training point.
  std::vector<std::array<double, 3>> l2;
  if (kind_ == ModelKind::kPclsk) {
    l2.resize(pts.size());
    for (std::size_t d = 0; d < 3; ++d) {
      const double offset = std::log(axis[d]);
      for (Eigen::Index i = 0; i < n; ++i) {
        l2[static_cast<std::size_t>(i)][d] = std::exp(2.0 * (offset + terms[d].mean[i]));
      }
    }
  }
  const Eigen::VectorXd* latent_coord = kind_ == ModelKind::kLeis ? &terms[0].mean : nullptr;

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Point& pj = pts[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < j; ++i) {
      const Point& pi = pts[static_cast<std::size_t>(i)];
      const double dx = pi.x - pj.x;
      const double dy = pi.y - pj.y;
      const double dt = pi.t - pj.t;
      double v;
      if (kind_ == ModelKind::kPclsk) {
        const auto& a = l2[static_cast<std::size_t>(i)];
        const auto& b = l2[static_cast<std::size_t>(j)];
        const double ax = 0.5 * (a[0] + b[0]);
        const double ay = 0.5 * (a[1] + b[1]);
        const double at = 0.5 * (a[2] + b[2]);
        const double pre = std::sqrt(std::sqrt(a[0] * b[0] * a[1] * b[1] * a[2] * b[2]) / (ax * ay * at));
        v = sf2 * pre * profile(family, dx * dx / ax + dy * dy / ay, dt * dt / at);
      } else {
        v = sf2 * profile(family, dx * dx * inv_len2[0] + dy * dy * inv_len2[1], dt * dt * inv_len2[2]);
        if (latent_coord) {
          const double r = ((*latent_coord)[i] - (*latent_coord)[j]) / ll;
          v *= std::exp(-0.5 * r * r);
        }
      }
      k(i, j) = v;
      k(j, i) = v;
    }
    k(j, j) = sf2 + sn2;
  }

  const auto chol = CholeskyFactor::try_compute(k);
  if (!chol) return kNegInf;
  const Eigen::VectorXd& y = data_.values();
  const Eigen::VectorXd alpha = chol->solve(y);
  const double data_lml =
      -0.5 * y.dot(alpha) - 0.5 * chol->log_det() - 0.5 * static_cast<double>(n) * kLog2Pi;
  total += data_lml;
  if (!std::isfinite(total)) return kNegInf;
  if (full_gradient == nullptr) return total;

  // d lml / d theta = 1/2 sum_ij A_ij dK_ij/dtheta, A = alpha alpha^T - K^{-1}.
  Eigen::MatrixXd a_mat = -chol->inverse();
  a_mat.noalias() += alpha * alpha.transpose();

  double g_sf = 0.0;
  double g_sn = 0.0;
  double g_ll = 0.0;
  std::array<double, 3> g_axis{};
  std::vector<Eigen::VectorXd> g_local(nf, Eigen::VectorXd::Zero(n));

  for (Eigen::Index i = 0; i < n; ++i) {
    g_sf += a_mat(i, i) * sf2;
    g_sn += a_mat(i, i) * sn2;
  }

  for (Eigen::Index j = 0; j < n; ++j) {
    const Point& pj = pts[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < j; ++i) {
      const Point& pi = pts[static_cast<std::size_t>(i)];
      const double aij = a_mat(i, j);
      const double kij = k(i, j);
      g_sf += aij * 2.0 * kij;
      const double dx = pi.x - pj.x;
      const double dy = pi.y - pj.y;
      const double dt = pi.t - pj.t;
      if (kind_ == ModelKind::kPclsk) {
        const auto& a = l2[static_cast<std::size_t>(i)];
        const auto& b = l2[static_cast<std::size_t>(j)];
        const double avg[3] = {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
        const double q[3] = {dx * dx / avg[0], dy * dy / avg[1], dt * dt / avg[2]};
        const ProfileEval pe = profile_partials(family, q[0] + q[1], q[2]);
        const double scale = pe.value > 0.0 ? kij / pe.value : 0.0;  // sf2 * prefactor
        for (std::size_t d = 0; d < 3; ++d) {
          const double w = a[d] / (a[d] + b[d]);
          const double dg = d < 2 ? pe.d_spatial : pe.d_temporal;
          const double di = kij * (0.5 - w) - scale * dg * 2.0 * q[d] * w;
          const double dj = kij * (w - 0.5) - scale * dg * 2.0 * q[d] * (1.0 - w);
          g_local[d][i] += aij * di;
          g_local[d][j] += aij * dj;
        }
      } else {
        const double q[3] = {dx * dx * inv_len2[0], dy * dy * inv_len2[1], dt * dt * inv_len2[2]};
        const ProfileEval pe = profile_partials(family, q[0] + q[1], q[2]);
        double mult = 1.0;
        double r = 0.0;
        if (latent_coord) {
          r = ((*latent_coord)[i] - (*latent_coord)[j]) / ll;
          mult = std::exp(-0.5 * r * r);
        }
        const double scale = sf2 * mult;
        g_axis[0] += aij * scale * pe.d_spatial * (-2.0 * q[0]);
        g_axis[1] += aij * scale * pe.d_spatial * (-2.0 * q[1]);
        g_axis[2] += aij * scale * pe.d_temporal * (-2.0 * q[2]);
        if (latent_coord) {
          g_ll += aij * kij * r * r;
          const double dli = -aij * kij * r / ll;
          g_local[0][i] += dli;
          g_local[0][j] -= dli;
        }
      }
    }
  }
  if (kind_ == ModelKind::kPclsk) {
    for (std::size_t d = 0; d < 3; ++d) g_axis[d] = g_local[d].sum();
  }

  Eigen::VectorXd& g = *full_gradient;
  g.setZero(full_size_);
  Eigen::Index pos = 0;
  g[pos++] = g_sf;
  g[pos++] = g_sn;
  if (family == KernelFamily::kSeAniso) {
    for (std::size_t d = 0; d < 3; ++d) g[pos++] = g_axis[d];
  } else {
    // axis lengths (1/b, 1/b, 1/a) in terms of (log a, log b)
    g[pos++] = -g_axis[2];
    g[pos++] = -(g_axis[0] + g_axis[1]);
  }
  if (kind_ == ModelKind::kLeis) g[pos++] = g_ll;

  for (std::size_t fi = 0; fi < nf; ++fi) {
    const LatentField& f = s.fields[fi];
    const FieldTerms& t = terms[fi];
    const Eigen::VectorXd u = t.chol->solve(Eigen::VectorXd(t.k_vm.transpose() * g_local[fi]));
    const Eigen::MatrixXd c_inv = t.chol->inverse();
    const auto gl = latent_length_gradient(f, pts, t, g_local[fi], u, c_inv);
    for (double v : gl) g[pos++] = v;
    const Eigen::VectorXd gz = u - t.beta;
    g.segment(pos, gz.size()) = gz;
    pos += gz.size();
  }
  return total;
}

double joint_objective(const ObservationSet& data, ModelKind kind, const GlobalHypers& globals,
                       const std::vector<LatentField>& fields) {
  JointState s{globals, fields};
  JointObjective obj(data, kind, s, FreeParams{});
  return obj.evaluate(s, nullptr);
}

namespace {

class NegatedObjective final : public ceres::FirstOrderFunction {
 public:
  explicit NegatedObjective(const JointObjective& objective) : objective_(objective) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const Eigen::Map<const Eigen::VectorXd> x(parameters, NumParameters());
    double v;
    if (gradient != nullptr) {
      Eigen::VectorXd g;
      v = objective_.value_and_gradient(x, g);
      Eigen::Map<Eigen::VectorXd>(gradient, NumParameters()) = -g;
    } else {
      v = objective_.value(x);
    }
    if (!std::isfinite(v)) return false;
    cost[0] = -v;
    return true;
  }

  int NumParameters() const override { return static_cast<int>(objective_.num_free()); }

 private:
  const JointObjective& objective_;
};

}  // namespace

JointResult joint_optimize(const ObservationSet& data, ModelKind kind, const JointState& init,
                           const JointOptions& options) {
  const JointObjective objective(data, kind, init, options.free);
  const Eigen::VectorXd x0 = objective.pack(init);

  JointResult result;
  result.state = init;
  result.initial_objective = objective.value(x0);
  result.objective = result.initial_objective;

  if (objective.num_free() == 0) {
    if (!std::isfinite(result.objective)) throw OptimizationFailure("initial state is not factorisable");
    return result;
  }

  ceres::GradientProblemSolver::Options solver_options;
  solver_options.line_search_direction_type = ceres::LBFGS;
  solver_options.max_num_iterations = options.max_iterations;
  solver_options.function_tolerance = options.tolerance;
  solver_options.logging_type = ceres::SILENT;
  solver_options.minimizer_progress_to_stdout = false;

  const std::size_t restarts = std::max<std::size_t>(options.restarts, 1);
  std::optional<Eigen::VectorXd> best_x;
  double best = result.initial_objective;

  for (std::size_t r = 0; r < restarts; ++r) {
    Eigen::VectorXd x = x0;
    if (r > 0) {
      std::seed_seq seq{static_cast<std::uint32_t>(options.seed & 0xffffffffu),
                        static_cast<std::uint32_t>(options.seed >> 32), static_cast<std::uint32_t>(r)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> noise(0.0, 1.0);
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double sd = objective.is_latent_value(static_cast<std::size_t>(k)) ? options.value_perturbation_sd
                                                                                  : options.perturbation_sd;
        x[k] += sd * noise(rng);
      }
    }
    if (!std::isfinite(objective.value(x))) {
      ++result.failed_restarts;
      result.restart_objectives.push_back(kNegInf);
      continue;
    }
    ceres::GradientProblem problem(new NegatedObjective(objective));
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(solver_options, problem, x.data(), &summary);
    const double v = objective.value(x);
    result.restart_objectives.push_back(v);
    if (!std::isfinite(v)) {
      ++result.failed_restarts;
      continue;
    }
    if (v > best || !std::isfinite(best)) {
      best = v;
      best_x = x;
    }
  }

  if (!std::isfinite(best)) {
    throw OptimizationFailure("all " + std::to_string(restarts) +
                              " restarts failed to reach a factorisable state");
  }
  if (best_x) result.state = objective.unpack(*best_x);
  result.objective = best;
  return result;
}

}  // namespace lisal
