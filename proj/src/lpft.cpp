#include "promptqa/lpft.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace promptqa::lpft {

namespace {

Matrix gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = dist(rng);
  return out;
}

Vector gaussian_vec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector out(n);
  for (int i = 0; i < n; ++i) out(i) = dist(rng);
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

SyntheticTask gen_synthetic_task(int d, int m, int k, int n, std::uint64_t seed,
                                 PromptMode prompt_mode, double noise_std) {
  if (m >= d) throw std::invalid_argument("need m < d");
  if (k > d) throw std::invalid_argument("need k <= d");
  if (n < m) throw std::invalid_argument("need n >= m");

  std::mt19937_64 rng(seed);
  SyntheticTask task;
  task.prompt_mode = prompt_mode;

  // Orthonormal frame of R^d: the first m columns span the training subspace
  // S, the remaining d-m columns are its complement U.
  Matrix frame = Eigen::HouseholderQR<Matrix>(gaussian(d, d, rng))
                     .householderQ() * Matrix::Identity(d, d);
  Matrix S = frame.leftCols(m);
  task.U = frame.rightCols(d - m);

  // Rows of X in S, scaled so the nonzero singular values are O(1) and the
  // pinned lr=1e-2 full-batch descent is stable.
  Matrix A = gaussian(n, m, rng) / std::sqrt(static_cast<double>(n));
  task.X = A * S.transpose();

  // Optimal parameters: orthonormal-row B*, unit head v*.
  Matrix Bstar_raw = gaussian(k, d, rng);
  Eigen::HouseholderQR<Matrix> qr(Bstar_raw.transpose());
  task.B_star = (qr.householderQ() * Matrix::Identity(d, k)).transpose();
  task.v_star = gaussian_vec(k, rng);
  task.v_star.normalize();
  task.w_star = task.B_star.transpose() * task.v_star;

  task.y = task.X * task.w_star;
  if (noise_std > 0.0) task.y += noise_std * gaussian_vec(n, rng);

  // Pre-trained extractor: B* plus a moderate perturbation. Large enough that
  // linear probing leaves a visible residual, small enough that the probed
  // head lands near v*.
  const double perturb = 0.3;
  task.B0 = task.B_star + perturb * gaussian(k, d, rng) / std::sqrt(d);

  // Prompt shift: always a component in S; mixed mode adds one along the
  // first complement direction.
  Vector p_in = S * gaussian_vec(m, rng);
  p_in.normalize();
  task.P = p_in;
  if (prompt_mode == PromptMode::mixed) {
    task.P += task.U.col(0);
  }

  // OOD samples: in-subspace part plus substantial components along U.
  const int n_ood = std::max(n, 2 * m);
  Matrix A2 = gaussian(n_ood, m, rng) / std::sqrt(static_cast<double>(n_ood));
  Matrix C = gaussian(n_ood, d - m, rng) / std::sqrt(static_cast<double>(d - m));
  task.ood_X = A2 * S.transpose() + C * task.U.transpose();
  task.ood_y = task.ood_X * task.w_star;
  return task;
}

double train_loss(const LinearModel& model, const Matrix& X, const Vector& y) {
  if (model.B.cols() != X.cols() || model.v.size() != model.B.rows() ||
      y.size() != X.rows())
    throw std::invalid_argument("train_loss: shape mismatch");
  return (model.predict(X) - y).squaredNorm();
}

Matrix grad_B(const LinearModel& model, const Matrix& X, const Vector& y) {
  if (model.B.cols() != X.cols() || model.v.size() != model.B.rows() ||
      y.size() != X.rows())
    throw std::invalid_argument("grad_B: shape mismatch");
  Vector residual = model.predict(X) - y;
  return 2.0 * model.v * residual.transpose() * X;
}

Vector grad_v(const LinearModel& model, const Matrix& X, const Vector& y) {
  if (model.B.cols() != X.cols() || model.v.size() != model.B.rows() ||
      y.size() != X.rows())
    throw std::invalid_argument("grad_v: shape mismatch");
  Vector residual = model.predict(X) - y;
  return 2.0 * model.B * X.transpose() * residual;
}

Matrix shift_inputs(const Matrix& X, const Vector& P) {
  if (P.size() != X.cols())
    throw std::invalid_argument("shift_inputs: P length must equal columns of X");
  return X.rowwise() + P.transpose();
}

Vector linear_probe(const Matrix& B0, const Matrix& X, const Vector& y,
                    bool allow_ridge, double ridge_lambda) {
  Matrix features = X * B0.transpose();  // n x k
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(features);
  if (cod.rank() < features.cols()) {
    if (!allow_ridge)
      throw std::runtime_error(
          "linear_probe: rank-deficient features; enable the ridge fallback");
    Matrix gram = features.transpose() * features;
    gram.diagonal().array() += ridge_lambda;
    return gram.ldlt().solve(features.transpose() * y);
  }
  return cod.solve(y);
}

Trajectory fine_tune(const LinearModel& model0, const Matrix& X, const Vector& y,
                     const TrainConfig& cfg, const SyntheticTask* task) {
  if (cfg.learning_rate < 0) throw std::invalid_argument("negative learning rate");
  Trajectory traj;
  traj.initial = model0;
  LinearModel model = model0;

  auto record = [&](int step) {
    StepRecord rec;
    rec.step = step;
    rec.train_loss = train_loss(model, X, y);
    rec.ood_mse = task ? ood_error(model, *task) : 0.0;
    traj.steps.push_back(rec);
    return rec.train_loss;
  };

  record(0);
  for (int step = 1; step <= cfg.steps; ++step) {
    Vector gv = grad_v(model, X, y);
    Matrix gB = grad_B(model, X, y);
    model.v -= cfg.learning_rate * gv;
    model.B -= cfg.learning_rate * gB;
    double loss = record(step);
    if (!std::isfinite(loss) || loss > 1e12)
      throw std::runtime_error("fine_tune diverged at step " +
                               std::to_string(step));
  }
  traj.final_model = model;
  return traj;
}

Trajectory lp_then_ft(const Matrix& B0, const Matrix& X, const Vector& y,
                      const TrainConfig& cfg, const SyntheticTask* task) {
  LinearModel model0;
  model0.B = B0;
  model0.v = linear_probe(B0, X, y, /*allow_ridge=*/true);
  TrainConfig ft_cfg = cfg;
  ft_cfg.head_init = HeadInit::lp_solution;
  return fine_tune(model0, X, y, ft_cfg, task);
}

double ood_error(const LinearModel& model, const SyntheticTask& task) {
  if (task.ood_X.rows() == 0)
    throw std::invalid_argument("task has no OOD evaluation set");
  return (model.predict(task.ood_X) - task.ood_y).squaredNorm() /
         task.ood_X.rows();
}

double head_alignment_error(const Vector& v0, const Vector& v_star) {
  double a = v0.dot(v_star);
  double b = v_star.dot(v_star);
  return std::abs(a * a - b * b);
}

BoundReport ft_ood_lower_bound(double phi, const Vector& w_star, double sigma,
                               double lhs, double tolerance) {
  BoundReport rep;
  rep.phi = phi;
  rep.w_star_norm = w_star.norm();
  rep.sigma = sigma;
  rep.lhs = lhs;
  const double denom = (1.0 + rep.w_star_norm) * (1.0 + rep.w_star_norm);
  double numer = phi;
  if (rep.w_star_norm > 0)
    numer = std::min(phi, phi * phi / rep.w_star_norm);
  rep.rhs = sigma * numer / denom;
  rep.satisfied = lhs >= rep.rhs - tolerance;
  return rep;
}

double smallest_nonzero_singular_value(const Matrix& B0, double eps) {
  Eigen::JacobiSVD<Matrix> svd(B0);
  double smallest = 0.0;
  const auto& sv = svd.singularValues();
  for (int i = sv.size() - 1; i >= 0; --i) {
    if (sv(i) > eps) {
      smallest = sv(i);
      break;
    }
  }
  return smallest;
}

namespace {

void check_distribution(const std::vector<double>& probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("probability out of [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("distribution does not sum to 1");
}

double neg_log_prob(double p, bool allow_infinite) {
  if (p <= 0.0) {
    if (allow_infinite) return std::numeric_limits<double>::infinity();
    throw std::domain_error("gold has probability 0");
  }
  return -std::log(p);
}

}  // namespace

double span_loss(const std::vector<double>& start_probs,
                 const std::vector<double>& end_probs, std::size_t gold_start,
                 std::size_t gold_end, bool allow_infinite) {
  check_distribution(start_probs);
  check_distribution(end_probs);
  if (gold_start >= start_probs.size() || gold_end >= end_probs.size())
    throw std::out_of_range("gold index out of range");
  return neg_log_prob(start_probs[gold_start], allow_infinite) +
         neg_log_prob(end_probs[gold_end], allow_infinite);
}

double seq_loss(const std::vector<std::vector<double>>& step_probs,
                const std::vector<std::size_t>& gold_tokens,
                bool allow_infinite) {
  if (step_probs.size() != gold_tokens.size())
    throw std::invalid_argument("one distribution per gold token required");
  double total = 0.0;
  for (std::size_t i = 0; i < step_probs.size(); ++i) {
    check_distribution(step_probs[i]);
    if (gold_tokens[i] >= step_probs[i].size())
      throw std::out_of_range("gold token out of range at step " +
                              std::to_string(i));
    total += neg_log_prob(step_probs[i][gold_tokens[i]], allow_infinite);
  }
  return total;
}

RunResult run_paired(const SimulationConfig& cfg, std::uint64_t seed) {
  SyntheticTask task = gen_synthetic_task(cfg.d, cfg.m, cfg.k, cfg.n, seed,
                                          cfg.prompt_mode);
  Matrix X = cfg.apply_prompt_shift ? shift_inputs(task.X, task.P) : task.X;
  const Vector& y = task.y;

  RunResult run;
  run.seed = seed;

  // FT: random unit head, same per-seed stream as the task for reproducibility.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  LinearModel ft0;
  ft0.B = task.B0;
  ft0.v = gaussian_vec(cfg.k, rng);
  ft0.v.normalize();

  TrainConfig ft_cfg = cfg.train;
  ft_cfg.seed = seed;
  ft_cfg.head_init = HeadInit::random;
  run.ft = fine_tune(ft0, X, y, ft_cfg, &task);
  run.lpft = lp_then_ft(task.B0, X, y, ft_cfg, &task);

  run.ft_ood = ood_error(run.ft.final_model, task);
  run.lpft_ood = ood_error(run.lpft.final_model, task);
  run.ft_final_id = run.ft.steps.back().train_loss;
  run.lpft_final_id = run.lpft.steps.back().train_loss;
  run.lp_id = run.lpft.steps.front().train_loss;

  run.phi_random = head_alignment_error(ft0.v, task.v_star);
  run.phi_lp = head_alignment_error(run.lpft.initial.v, task.v_star);
  run.sigma = cfg.sigma_override > 0.0
                  ? cfg.sigma_override
                  : smallest_nonzero_singular_value(task.B0);

  // The bound is evaluated at every logged FT step and at the final step.
  for (const StepRecord& rec : run.ft.steps) {
    BoundReport rep = ft_ood_lower_bound(run.phi_random, task.w_star, run.sigma,
                                         std::sqrt(rec.ood_mse));
    ++run.bound_steps_checked;
    if (rep.satisfied) ++run.bound_steps_satisfied;
    if (rec.step == run.ft.steps.back().step) {
      run.bound_rhs = rep.rhs;
      run.bound_satisfied_final = rep.satisfied;
    }
  }
  return run;
}

SimulationSummary simulate(const SimulationConfig& cfg) {
  SimulationSummary summary;
  std::vector<double> ft_ood, lpft_ood, ft_id, lp_id;
  std::size_t wins = 0, bound_ok = 0;
  for (std::uint64_t seed = cfg.seed_begin; seed <= cfg.seed_end; ++seed) {
    RunResult run = run_paired(cfg, seed);
    ft_ood.push_back(run.ft_ood);
    lpft_ood.push_back(run.lpft_ood);
    ft_id.push_back(run.ft_final_id);
    lp_id.push_back(run.lp_id);
    if (run.lpft_ood <= run.ft_ood) ++wins;
    if (run.bound_satisfied_final) ++bound_ok;
    summary.runs.push_back(std::move(run));
  }
  const std::size_t n = summary.runs.size();
  if (n == 0) return summary;
  summary.median_ft_ood = median(ft_ood);
  summary.median_lpft_ood = median(lpft_ood);
  summary.median_ft_final_id = median(ft_id);
  summary.median_lp_id = median(lp_id);
  summary.lpft_wins_fraction = static_cast<double>(wins) / n;
  summary.bound_satisfaction_rate = static_cast<double>(bound_ok) / n;
  return summary;
}

}  // namespace promptqa::lpft
