#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cslg/core.hpp"
#include "cslg/giw.hpp"
#include "cslg/metrics.hpp"
#include "cslg/rng.hpp"

namespace cslg::bayes {

/// Observed data: word indices per situation and one feature matrix
/// (dim x situations) per percept modality.
struct Corpus {
  std::vector<std::string> vocabulary;
  std::vector<std::vector<int>> words;
  std::array<Eigen::MatrixXd, 3> features;

  std::size_t size() const { return words.size(); }
  std::optional<int> word_index(const std::string& surface) const;
};

/// Vocabulary is the sorted set of training surfaces.
Corpus make_corpus(std::span<const Situation> situations);

struct BayesConfig {
  int iterations = 100;
  std::array<int, 3> components{5, 5, 5};
  double lambda = 1.0;
  double alpha = 1.0;
  double gamma = 1.0;
  double kappa0 = 0.01;
  double psi_scale = 0.01;
  double nu0_offset = 2.0;  // nu0 = dim + offset
};

struct Hyperparams {
  double lambda = 1.0;                  // pi_w ~ Dir(lambda)
  std::array<double, 3> alpha{1, 1, 1};  // pi_s, pi_c, pi_a ~ Dir(alpha)
  double gamma = 1.0;                   // theta_{m,Z} ~ Dir(gamma)
  std::array<NiwParams<double>, 3> beta;  // phi ~ GIW(beta)
  std::array<int, 3> components{5, 5, 5};  // K_s, K_c, K_a

  /// Throws DimensionMismatch / NumericalError / ConfigError.
  void validate(const Corpus& corpus) const;
};

/// mu0 = data mean, kappa0, Psi = psi_scale * I, nu0 = dim + nu0_offset.
Hyperparams default_hyperparams(const Corpus& corpus, const BayesConfig& cfg = {});

inline constexpr int kModalityCount = 4;  // shape, color, action, auxiliary

struct ModelState {
  Corpus corpus;                             // w_i, s, c, a
  std::array<Eigen::MatrixXd, 3> theta;      // theta_{m,Z}: K_m x V
  Eigen::VectorXd theta_aux;                 // theta for the auxiliary modality
  std::array<std::vector<Gaussian<double>>, 3> phi;
  Eigen::Vector4d pi_w;
  std::array<Eigen::VectorXd, 3> pi;
  std::vector<std::vector<Modality>> token_modality;  // m_i
  std::array<std::vector<int>, 3> component;          // Z_s, Z_c, Z_a per situation

  int components(Modality m) const { return static_cast<int>(phi.at(index_of(m)).size()); }
};

ModelState init(const Corpus& corpus, const Hyperparams& hyper, Rng& rng);

/// One pass over all latent variables in the order
/// phi_s, phi_c, phi_a, pi_w, pi_s, pi_c, pi_a, Z_s, Z_c, Z_a, theta, m.
void gibbs_sweep(ModelState& state, const Hyperparams& hyper, Rng& rng);

/// init followed by n_iter sweeps; the last sample is returned. `on_sweep`
/// sees the state after every sweep.
ModelState fit(const Corpus& corpus, const Hyperparams& hyper, int n_iter, Rng& rng,
               const std::function<void(int, const ModelState&)>& on_sweep = {});

/// log p(w, s, c, a, m, Z | hyper) with theta, phi and pi integrated out.
double complete_data_log_likelihood(const ModelState& state, const Hyperparams& hyper);

/// log p(w, s, c, a, m, Z | theta, phi, pi) at the current parameter sample.
double conditional_log_likelihood(const ModelState& state);

/// Throws NumericalError when a categorical is not normalized or a covariance
/// is not symmetric positive-definite.
void check_invariants(const ModelState& state);

struct Prediction {
  Modality modality = Modality::Auxiliary;
  std::optional<int> component;  // none for the auxiliary modality
};

/// argmax over (m, Z) of pi_w(m) theta_{m,Z}(w) pi_m(Z); the auxiliary modality
/// competes with pi_w(AW) theta_AW(w). Ties go to the earlier modality, then the
/// lower component. Unknown words yield nullopt.
std::optional<Prediction> predict_grounding(const ModelState& state, const std::string& word);

/// Majority truth category of each component over the training assignments;
/// components with no situations have none.
std::array<std::vector<std::optional<int>>, 3> component_majority(
    const ModelState& state, std::span<const Situation> train);

/// Relabels the components of one modality: old component k becomes perm[k].
void permute_components(ModelState& state, Modality m, std::span<const int> perm);

Metrics score_baseline(const ModelState& state, std::span<const Situation> train,
                       std::span<const Situation> test);

}  // namespace cslg::bayes
