#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace promptqa::lpft {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Linear predictor x -> v^T (B x): head v (k) over feature extractor B (k x d).
struct LinearModel {
  Vector v;
  Matrix B;

  Vector predict(const Matrix& X) const { return X * B.transpose() * v; }
};

enum class PromptMode { orthogonal, mixed };

// Synthetic ID/OOD regression task. Rows of X live in the m-dimensional
// training subspace S; columns of U are an orthonormal basis of its
// complement. The OOD set has components along U. P is the prompt shift.
struct SyntheticTask {
  Matrix X;       // n x d, rows in S
  Vector y;       // X * w_star
  Matrix U;       // d x (d - m), orthonormal, X * U = 0
  Vector v_star;  // k
  Matrix B_star;  // k x d
  Vector w_star;  // B_star^T v_star
  Matrix B0;      // pre-trained feature extractor (perturbed B_star)
  Vector P;       // prompt shift vector, length d
  Matrix ood_X;
  Vector ood_y;
  PromptMode prompt_mode = PromptMode::mixed;
};

SyntheticTask gen_synthetic_task(int d, int m, int k, int n, std::uint64_t seed,
                                 PromptMode prompt_mode = PromptMode::mixed,
                                 double noise_std = 0.0);

// ||X B^T v - y||^2
double train_loss(const LinearModel& model, const Matrix& X, const Vector& y);

// Gradient of the squared-residual loss in the feature extractor:
// 2 v (X B^T v - y)^T X  (k x d).
Matrix grad_B(const LinearModel& model, const Matrix& X, const Vector& y);

// 2 B X^T (X B^T v - y)  (k)
Vector grad_v(const LinearModel& model, const Matrix& X, const Vector& y);

// Adds P to every row of X.
Matrix shift_inputs(const Matrix& X, const Vector& P);

// Minimum-norm least-squares head on frozen features X B0^T. Rank-deficient
// features need the ridge fallback; otherwise an error is raised.
Vector linear_probe(const Matrix& B0, const Matrix& X, const Vector& y,
                    bool allow_ridge = false, double ridge_lambda = 1e-8);

enum class HeadInit { random, lp_solution };

struct TrainConfig {
  int steps = 2000;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
  HeadInit head_init = HeadInit::random;
};

struct StepRecord {
  int step = 0;
  double train_loss = 0.0;
  double ood_mse = 0.0;
};

struct Trajectory {
  LinearModel initial;
  LinearModel final_model;
  std::vector<StepRecord> steps;  // one record per step, step 0 = init
};

// Full-batch gradient descent on (v, B) for cfg.steps steps. Diverging runs
// (loss > 1e12) raise an error naming the step.
Trajectory fine_tune(const LinearModel& model0, const Matrix& X, const Vector& y,
                     const TrainConfig& cfg, const SyntheticTask* task = nullptr);

// linear_probe for the head, then fine_tune from (v_lp, B0).
Trajectory lp_then_ft(const Matrix& B0, const Matrix& X, const Vector& y,
                      const TrainConfig& cfg, const SyntheticTask* task = nullptr);

// Mean squared error on the task's OOD evaluation set.
double ood_error(const LinearModel& model, const SyntheticTask& task);

// phi = |(v0^T v*)^2 - (v*^T v*)^2|
double head_alignment_error(const Vector& v0, const Vector& v_star);

struct BoundReport {
  double phi = 0.0;
  double w_star_norm = 0.0;
  double sigma = 0.0;
  double rhs = 0.0;
  double lhs = 0.0;  // sqrt of the fine-tuned model's OOD error
  bool satisfied = false;
};

// sqrt(L_ood) >= sigma * min(phi, phi^2 / ||w*||) / (1 + ||w*||)^2
BoundReport ft_ood_lower_bound(double phi, const Vector& w_star, double sigma,
                               double lhs, double tolerance = 1e-12);

// Default sigma policy: smallest nonzero singular value of B0.
double smallest_nonzero_singular_value(const Matrix& B0, double eps = 1e-12);

// Cross-entropy of the gold span under externally supplied per-position
// start/end distributions. `allow_infinite` turns a zero-probability gold into
// +inf instead of an error.
double span_loss(const std::vector<double>& start_probs,
                 const std::vector<double>& end_probs, std::size_t gold_start,
                 std::size_t gold_end, bool allow_infinite = false);

// Sum of negative log probabilities of the gold tokens, one conditional
// distribution per step.
double seq_loss(const std::vector<std::vector<double>>& step_probs,
                const std::vector<std::size_t>& gold_tokens,
                bool allow_infinite = false);

// One seeded paired FT / LP-FT run, as emitted by the `simulate` subcommand.
struct RunResult {
  std::uint64_t seed = 0;
  double ft_ood = 0.0;
  double lpft_ood = 0.0;
  double ft_final_id = 0.0;
  double lp_id = 0.0;
  double lpft_final_id = 0.0;
  double phi_random = 0.0;  // alignment error of the random head
  double phi_lp = 0.0;
  double sigma = 0.0;
  double bound_rhs = 0.0;
  bool bound_satisfied_final = false;
  // bound satisfaction across all logged FT steps
  std::size_t bound_steps_checked = 0;
  std::size_t bound_steps_satisfied = 0;
  Trajectory ft;
  Trajectory lpft;
};

struct SimulationConfig {
  int d = 50, m = 20, k = 10, n = 40;
  std::uint64_t seed_begin = 1;
  std::uint64_t seed_end = 50;  // inclusive
  TrainConfig train;
  PromptMode prompt_mode = PromptMode::mixed;
  double sigma_override = 0.0;  // 0 -> smallest nonzero singular value of B0
  bool apply_prompt_shift = false;
};

struct SimulationSummary {
  std::vector<RunResult> runs;
  double median_ft_ood = 0.0;
  double median_lpft_ood = 0.0;
  double median_ft_final_id = 0.0;
  double median_lp_id = 0.0;
  double lpft_wins_fraction = 0.0;  // lpft_ood <= ft_ood
  double bound_satisfaction_rate = 0.0;  // at the final step
};

RunResult run_paired(const SimulationConfig& cfg, std::uint64_t seed);
SimulationSummary simulate(const SimulationConfig& cfg);

}  // namespace promptqa::lpft
