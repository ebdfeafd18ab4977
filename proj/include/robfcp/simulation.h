#ifndef ROBFCP_SIMULATION_H_
#define ROBFCP_SIMULATION_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "robfcp/attacks.h"
#include "robfcp/calibration.h"
#include "robfcp/certify.h"
#include "robfcp/detection.h"
#include "robfcp/rng.h"
#include "robfcp/score.h"

namespace robfcp {

enum class SimulationMode {
  kSample,           // per-sample synthetic classifier outputs
  kHistogramDirect,  // benign reports drawn as multinomials over true bin probabilities
};

std::string_view simulation_mode_name(SimulationMode m);
SimulationMode parse_simulation_mode(std::string_view name);

struct SimulationConfig {
  std::size_t K = 10;
  std::size_t k_m = 0;
  std::int64_t n_per_client = 2000;
  std::vector<std::int64_t> n_list;  // per-client sizes; overrides n_per_client when set
  std::size_t C = 10;
  std::size_t H = 100;
  double alpha = 0.1;
  double beta = 0.05;
  double dirichlet_beta = 0.5;
  double signal = 2.0;
  // Clients get signals spread linearly over [signal - spread/2, signal + spread/2]
  // by id, a heterogeneity knob on the score distribution itself.
  double signal_spread = 0.0;
  bool homogeneous = false;  // uniform class mixtures, Homogeneous certificate
  ScoreKind score_kind = ScoreKind::kLac;
  AttackSpec attack;
  std::string p_norm = "2";
  bool km_known = true;
  std::size_t n_test = 2000;
  std::size_t trials = 1;
  std::uint64_t seed = 42;
  SimulationMode mode = SimulationMode::kSample;
  std::size_t reference_samples = 200000;

  std::int64_t client_n(std::size_t k) const;
  std::size_t k_b() const { return K - k_m; }
  // Throws ConfigError naming the field and the violated constraint.
  void validate() const;
};

struct ClientProfile {
  std::int64_t n;
  std::vector<double> class_mixture;
  double signal;
  bool is_malicious;
};

// For each class draws a K-vector of client shares from Dir(beta); client
// mixtures are the per-client shares normalized over classes.
std::vector<std::vector<double>> dirichlet_mixture(std::size_t C, std::size_t K,
                                                   double dirichlet_beta, Rng& rng);

// Multinomial(n, probs) via sequential binomials.
std::vector<std::int64_t> sample_multinomial(std::int64_t n, std::span<const double> probs,
                                             Rng& rng);

struct ClientData {
  std::vector<double> calibration_scores;  // true-label scores, profile.n of them
  std::vector<TestRow> test_rows;
};

// Synthetic classifier: label ~ class_mixture, logits ~ N(0, I_C) with
// `signal` added on the true class, probabilities = softmax(logits).
ClientData generate_client_data(const ClientProfile& profile, std::size_t C,
                                ScoreKind score_kind, std::size_t num_test_rows, Rng& rng);

struct TrialReport {
  std::size_t trial = 0;
  std::uint64_t trial_seed = 0;
  EvalMetrics naive{};
  EvalMetrics robust{};
  QuantileEstimate q_naive{};
  QuantileEstimate q_robust{};
  std::vector<std::size_t> benign_set;
  std::size_t k_m_hat = 0;
  bool detection_exact = false;
  CoverageCertificate certificate{};
};

// Shared per-config state (true score-bin probabilities per signal level and
// reference test rows). run() is const and safe to call concurrently.
class TrialRunner {
 public:
  explicit TrialRunner(SimulationConfig config);

  const SimulationConfig& config() const noexcept { return config_; }
  TrialReport run(std::size_t trial_index) const;

  // True bin probabilities of client k's calibration scores.
  const std::vector<double>& true_bin_probs(std::size_t k) const;

 private:
  struct Reference {
    std::vector<double> bin_probs;
    TestBatch rows;
  };

  SimulationConfig config_;
  BinEdges edges_;
  std::vector<double> signals_;
  std::vector<std::size_t> reference_of_;  // client -> reference index
  std::vector<Reference> references_;
};

TrialReport run_trial(const SimulationConfig& config, std::size_t trial_index);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one trial
  double min = 0.0;
  double max = 0.0;
};

struct MonteCarloResult {
  std::vector<TrialReport> trials;
  std::map<std::string, MetricSummary> aggregates;
};

// Names of the per-trial metrics summarized by monte_carlo, in report order.
const std::vector<std::string>& trial_metric_names();
double trial_metric(const TrialReport& r, const std::string& name);

// Runs config.trials trials on up to `threads` workers. Trial t uses seed
// config.seed ^ t; the result does not depend on the thread count.
MonteCarloResult monte_carlo(const SimulationConfig& config, std::size_t threads = 1);

}  // namespace robfcp

#endif  // ROBFCP_SIMULATION_H_
