#include "cslg/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace cslg::bayes {

namespace {

constexpr std::size_t kAux = 3;

Eigen::MatrixXd columns_with(const Eigen::MatrixXd& x, const std::vector<int>& z, int k) {
  std::vector<Eigen::Index> idx;
  for (std::size_t n = 0; n < z.size(); ++n)
    if (z[n] == k) idx.push_back(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(idx[j]);
  return out;
}

Gaussian<double> draw_component(const NiwParams<double>& p, Rng& rng, Modality m, int k) {
  auto g = sample_niw(p, rng);
  if (!g)
    throw NumericalError("covariance posterior not positive-definite for " +
                         std::string(to_string(m)) + " component " + std::to_string(k));
  return std::move(*g);
}

double log_dirichlet_multinomial(const Eigen::Ref<const Eigen::VectorXd>& counts, double a) {
  const double k = static_cast<double>(counts.size());
  const double n = counts.sum();
  double r = std::lgamma(k * a) - std::lgamma(k * a + n);
  for (Eigen::Index i = 0; i < counts.size(); ++i) r += std::lgamma(a + counts[i]) - std::lgamma(a);
  return r;
}

// Token counts per theta row: rows 0..K_m-1 per modality, plus the auxiliary row.
struct EmissionCounts {
  std::array<Eigen::MatrixXd, 3> per_modality;
  Eigen::VectorXd aux;
};

EmissionCounts emission_counts(const ModelState& s) {
  const auto v = static_cast<Eigen::Index>(s.corpus.vocabulary.size());
  EmissionCounts c;
  for (std::size_t m = 0; m < 3; ++m) c.per_modality[m] = Eigen::MatrixXd::Zero(s.components(static_cast<Modality>(m)), v);
  c.aux = Eigen::VectorXd::Zero(v);
  for (std::size_t n = 0; n < s.corpus.size(); ++n) {
    for (std::size_t i = 0; i < s.corpus.words[n].size(); ++i) {
      const int w = s.corpus.words[n][i];
      const std::size_t m = index_of(s.token_modality[n][i]);
      if (m == kAux)
        c.aux[w] += 1;
      else
        c.per_modality[m](s.component[m][n], w) += 1;
    }
  }
  return c;
}

}  // namespace

std::optional<int> Corpus::word_index(const std::string& surface) const {
  auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), surface);
  if (it == vocabulary.end() || *it != surface) return std::nullopt;
  return static_cast<int>(it - vocabulary.begin());
}

Corpus make_corpus(std::span<const Situation> situations) {
  Corpus c;
  std::set<std::string> vocab;
  for (const auto& s : situations)
    for (const auto& t : s.tokens) vocab.insert(t.surface);
  c.vocabulary.assign(vocab.begin(), vocab.end());

  const auto n = static_cast<Eigen::Index>(situations.size());
  for (Modality m : kPerceptModalities) {
    const Eigen::Index d = situations.empty() ? 0 : situations[0].feature(m).size();
    c.features[index_of(m)].resize(d, n);
  }
  for (std::size_t j = 0; j < situations.size(); ++j) {
    std::vector<int> idx;
    for (const auto& t : situations[j].tokens) idx.push_back(*c.word_index(t.surface));
    c.words.push_back(std::move(idx));
    for (Modality m : kPerceptModalities) {
      const auto& f = situations[j].feature(m);
      auto& x = c.features[index_of(m)];
      if (f.size() != x.rows())
        throw DimensionMismatch("make_corpus: inconsistent " + std::string(to_string(m)) +
                                " feature dimension");
      x.col(static_cast<Eigen::Index>(j)) = f;
    }
  }
  return c;
}

void Hyperparams::validate(const Corpus& corpus) const {
  if (!(lambda > 0) || !(gamma > 0)) throw ConfigError("bayes: lambda and gamma must be positive");
  for (Modality m : kPerceptModalities) {
    const auto i = index_of(m);
    const auto& b = beta[i];
    const std::string name(to_string(m));
    if (components[i] < 1) throw ConfigError("bayes: K_" + name + " must be >= 1");
    if (!(alpha[i] > 0)) throw ConfigError("bayes: alpha_" + name + " must be positive");
    if (b.dim() != corpus.features[i].rows() || b.scale.rows() != b.dim() ||
        b.scale.cols() != b.dim())
      throw DimensionMismatch("bayes: beta_" + name + " dimension does not match features");
    if (!(b.kappa > 0)) throw ConfigError("bayes: kappa0 for " + name + " must be positive");
    if (!(b.dof > static_cast<double>(b.dim()) - 1))
      throw ConfigError("bayes: nu0 for " + name + " must exceed dim - 1");
    Eigen::LLT<Eigen::MatrixXd> llt(b.scale);
    if (llt.info() != Eigen::Success || !b.scale.isApprox(b.scale.transpose()))
      throw NumericalError("bayes: scale matrix for " + name + " is not positive-definite");
  }
}

Hyperparams default_hyperparams(const Corpus& corpus, const BayesConfig& cfg) {
  Hyperparams h;
  h.lambda = cfg.lambda;
  h.alpha = {cfg.alpha, cfg.alpha, cfg.alpha};
  h.gamma = cfg.gamma;
  h.components = cfg.components;
  for (std::size_t m = 0; m < 3; ++m) {
    const auto& x = corpus.features[m];
    const Eigen::Index d = x.rows();
    NiwParams<double> b;
    b.mean = x.cols() > 0 ? Eigen::VectorXd(x.rowwise().mean()) : Eigen::VectorXd::Zero(d);
    b.kappa = cfg.kappa0;
    b.scale = cfg.psi_scale * Eigen::MatrixXd::Identity(d, d);
    b.dof = static_cast<double>(d) + cfg.nu0_offset;
    h.beta[m] = std::move(b);
  }
  return h;
}

ModelState init(const Corpus& corpus, const Hyperparams& hyper, Rng& rng) {
  if (corpus.size() == 0) throw Error("bayes::init: empty corpus");
  hyper.validate(corpus);

  ModelState s;
  s.corpus = corpus;
  const auto v = static_cast<Eigen::Index>(corpus.vocabulary.size());

  s.token_modality.resize(corpus.size());
  for (std::size_t n = 0; n < corpus.size(); ++n)
    for (std::size_t i = 0; i < corpus.words[n].size(); ++i)
      s.token_modality[n].push_back(static_cast<Modality>(rng.uniform_int(kModalityCount)));

  for (Modality m : kPerceptModalities) {
    const auto i = index_of(m);
    const int k = hyper.components[i];
    s.component[i].resize(corpus.size());
    for (auto& z : s.component[i]) z = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k)));
  }

  s.pi_w = rng.dirichlet(Eigen::VectorXd::Constant(kModalityCount, hyper.lambda));
  for (std::size_t i = 0; i < 3; ++i)
    s.pi[i] = rng.dirichlet(Eigen::VectorXd::Constant(hyper.components[i], hyper.alpha[i]));

  for (std::size_t i = 0; i < 3; ++i) {
    s.theta[i].resize(hyper.components[i], v);
    for (int k = 0; k < hyper.components[i]; ++k)
      s.theta[i].row(k) = rng.dirichlet(Eigen::VectorXd::Constant(v, hyper.gamma)).transpose();
  }
  s.theta_aux = rng.dirichlet(Eigen::VectorXd::Constant(v, hyper.gamma));

  for (Modality m : kPerceptModalities) {
    const auto i = index_of(m);
    for (int k = 0; k < hyper.components[i]; ++k)
      s.phi[i].push_back(draw_component(hyper.beta[i], rng, m, k));
  }
  return s;
}

void gibbs_sweep(ModelState& s, const Hyperparams& hyper, Rng& rng) {
  const std::size_t n_sit = s.corpus.size();

  // phi_m | data, beta_m
  for (Modality m : kPerceptModalities) {
    const auto i = index_of(m);
    for (int k = 0; k < s.components(m); ++k) {
      const auto post = niw_posterior<double>(hyper.beta[i], columns_with(s.corpus.features[i], s.component[i], k));
      s.phi[i][static_cast<std::size_t>(k)] = draw_component(post, rng, m, k);
    }
  }

  // pi_w | lambda, m
  Eigen::VectorXd mod_counts = Eigen::VectorXd::Constant(kModalityCount, hyper.lambda);
  for (const auto& row : s.token_modality)
    for (Modality m : row) mod_counts[static_cast<Eigen::Index>(index_of(m))] += 1;
  s.pi_w = rng.dirichlet(mod_counts);

  // pi_m | alpha_m, Z_m
  for (std::size_t i = 0; i < 3; ++i) {
    Eigen::VectorXd c = Eigen::VectorXd::Constant(hyper.components[i], hyper.alpha[i]);
    for (int z : s.component[i]) c[z] += 1;
    s.pi[i] = rng.dirichlet(c);
  }

  // Z_m | x, pi_m, w
  for (Modality m : kPerceptModalities) {
    const auto i = index_of(m);
    const int k_count = s.components(m);
    std::vector<GaussianDensity<double>> dens;
    for (const auto& g : s.phi[i]) dens.emplace_back(g);
    const Eigen::MatrixXd log_theta = s.theta[i].array().log();
    std::vector<double> logw(static_cast<std::size_t>(k_count));
    for (std::size_t n = 0; n < n_sit; ++n) {
      const auto x = s.corpus.features[i].col(static_cast<Eigen::Index>(n));
      for (int k = 0; k < k_count; ++k) {
        double lw = std::log(s.pi[i][k]) + dens[static_cast<std::size_t>(k)].log_density(x);
        for (std::size_t t = 0; t < s.corpus.words[n].size(); ++t)
          if (s.token_modality[n][t] == m) lw += log_theta(k, s.corpus.words[n][t]);
        logw[static_cast<std::size_t>(k)] = lw;
      }
      s.component[i][n] = static_cast<int>(rng.categorical_log(logw));
    }
  }

  // theta_{m,Z} | m, Z, gamma, w
  const auto counts = emission_counts(s);
  for (std::size_t i = 0; i < 3; ++i)
    for (Eigen::Index k = 0; k < s.theta[i].rows(); ++k)
      s.theta[i].row(k) =
          rng.dirichlet((counts.per_modality[i].row(k).array() + hyper.gamma).matrix().transpose())
              .transpose();
  s.theta_aux = rng.dirichlet((counts.aux.array() + hyper.gamma).matrix());

  // m_i | theta, Z, pi_w, w_i
  std::array<double, kModalityCount> logw{};
  for (std::size_t n = 0; n < n_sit; ++n) {
    for (std::size_t t = 0; t < s.corpus.words[n].size(); ++t) {
      const int w = s.corpus.words[n][t];
      for (std::size_t i = 0; i < 3; ++i)
        logw[i] = std::log(s.pi_w[static_cast<Eigen::Index>(i)]) + std::log(s.theta[i](s.component[i][n], w));
      logw[kAux] = std::log(s.pi_w[kAux]) + std::log(s.theta_aux[w]);
      s.token_modality[n][t] = static_cast<Modality>(rng.categorical_log(logw));
    }
  }
}

ModelState fit(const Corpus& corpus, const Hyperparams& hyper, int n_iter, Rng& rng,
               const std::function<void(int, const ModelState&)>& on_sweep) {
  if (n_iter < 0) throw ConfigError("bayes: iterations must be >= 0");
  ModelState s = init(corpus, hyper, rng);
  for (int it = 0; it < n_iter; ++it) {
    gibbs_sweep(s, hyper, rng);
    if (on_sweep) on_sweep(it, s);
  }
  return s;
}

double complete_data_log_likelihood(const ModelState& s, const Hyperparams& hyper) {
  double ll = 0.0;
  for (Modality m : kPerceptModalities) {
    const auto i = index_of(m);
    Eigen::VectorXd zc = Eigen::VectorXd::Zero(s.components(m));
    for (int k = 0; k < s.components(m); ++k) {
      const auto x = columns_with(s.corpus.features[i], s.component[i], k);
      zc[k] = static_cast<double>(x.cols());
      ll += niw_log_marginal<double>(hyper.beta[i], x);
    }
    ll += log_dirichlet_multinomial(zc, hyper.alpha[i]);
  }
  Eigen::VectorXd mc = Eigen::VectorXd::Zero(kModalityCount);
  for (const auto& row : s.token_modality)
    for (Modality m : row) mc[static_cast<Eigen::Index>(index_of(m))] += 1;
  ll += log_dirichlet_multinomial(mc, hyper.lambda);

  const auto counts = emission_counts(s);
  for (std::size_t i = 0; i < 3; ++i)
    for (Eigen::Index k = 0; k < counts.per_modality[i].rows(); ++k)
      ll += log_dirichlet_multinomial(counts.per_modality[i].row(k).transpose(), hyper.gamma);
  ll += log_dirichlet_multinomial(counts.aux, hyper.gamma);
  return ll;
}

double conditional_log_likelihood(const ModelState& s) {
  double ll = 0.0;
  for (Modality m : kPerceptModalities) {
    const auto i = index_of(m);
    std::vector<GaussianDensity<double>> dens;
    for (const auto& g : s.phi[i]) dens.emplace_back(g);
    for (std::size_t n = 0; n < s.corpus.size(); ++n) {
      const int z = s.component[i][n];
      ll += std::log(s.pi[i][z]) +
            dens[static_cast<std::size_t>(z)].log_density(s.corpus.features[i].col(static_cast<Eigen::Index>(n)));
    }
  }
  for (std::size_t n = 0; n < s.corpus.size(); ++n) {
    for (std::size_t t = 0; t < s.corpus.words[n].size(); ++t) {
      const int w = s.corpus.words[n][t];
      const auto mi = index_of(s.token_modality[n][t]);
      ll += std::log(s.pi_w[static_cast<Eigen::Index>(mi)]);
      ll += mi == kAux ? std::log(s.theta_aux[w]) : std::log(s.theta[mi](s.component[mi][n], w));
    }
  }
  return ll;
}

void check_invariants(const ModelState& s) {
  constexpr double kTol = 1e-9;
  auto normalized = [](const Eigen::Ref<const Eigen::VectorXd>& v) {
    return std::abs(v.sum() - 1.0) <= kTol && (v.array() >= 0.0).all();
  };
  if (!normalized(s.pi_w)) throw NumericalError("pi_w is not normalized");
  if (!normalized(s.theta_aux)) throw NumericalError("theta_AW is not normalized");
  for (Modality m : kPerceptModalities) {
    const auto i = index_of(m);
    const std::string name(to_string(m));
    if (!normalized(s.pi[i])) throw NumericalError("pi_" + name + " is not normalized");
    for (Eigen::Index k = 0; k < s.theta[i].rows(); ++k)
      if (!normalized(s.theta[i].row(k).transpose()))
        throw NumericalError("theta_" + name + "," + std::to_string(k) + " is not normalized");
    for (std::size_t k = 0; k < s.phi[i].size(); ++k) {
      const auto& cov = s.phi[i][k].cov;
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (!cov.isApprox(cov.transpose()) || llt.info() != Eigen::Success)
        throw NumericalError("covariance of " + name + " component " + std::to_string(k) +
                             " is not symmetric positive-definite");
    }
    if (s.component[i].size() != s.corpus.size())
      throw NumericalError("Z_" + name + " has the wrong length");
  }
}

std::optional<Prediction> predict_grounding(const ModelState& s, const std::string& word) {
  const auto w = s.corpus.word_index(word);
  if (!w) return std::nullopt;
  Prediction best;
  double best_score = -1.0;
  for (Modality m : kPerceptModalities) {
    const auto i = index_of(m);
    for (int k = 0; k < s.components(m); ++k) {
      const double score = s.pi_w[static_cast<Eigen::Index>(i)] * s.theta[i](k, *w) * s.pi[i][k];
      if (score > best_score) {
        best_score = score;
        best = {m, k};
      }
    }
  }
  if (s.pi_w[kAux] * s.theta_aux[*w] > best_score) best = {Modality::Auxiliary, std::nullopt};
  return best;
}

std::array<std::vector<std::optional<int>>, 3> component_majority(const ModelState& s,
                                                                  std::span<const Situation> train) {
  std::array<std::vector<std::optional<int>>, 3> out;
  for (Modality m : kPerceptModalities) {
    const auto i = index_of(m);
    std::vector<std::map<int, int>> votes(static_cast<std::size_t>(s.components(m)));
    for (std::size_t n = 0; n < train.size() && n < s.component[i].size(); ++n)
      ++votes[static_cast<std::size_t>(s.component[i][n])][train[n].truth[i]];
    for (const auto& tally : votes) {
      if (tally.empty()) {
        out[i].push_back(std::nullopt);
        continue;
      }
      auto best = std::max_element(tally.begin(), tally.end(),
                                   [](const auto& a, const auto& b) { return a.second < b.second; });
      out[i].push_back(best->first);
    }
  }
  return out;
}

void permute_components(ModelState& s, Modality m, std::span<const int> perm) {
  const auto i = index_of(m);
  const auto k = static_cast<std::size_t>(s.components(m));
  if (perm.size() != k) throw Error("permute_components: permutation size mismatch");
  Eigen::MatrixXd theta(s.theta[i].rows(), s.theta[i].cols());
  Eigen::VectorXd pi(s.pi[i].size());
  std::vector<Gaussian<double>> phi(k);
  for (std::size_t old = 0; old < k; ++old) {
    const auto nu = static_cast<std::size_t>(perm[old]);
    theta.row(static_cast<Eigen::Index>(nu)) = s.theta[i].row(static_cast<Eigen::Index>(old));
    pi[static_cast<Eigen::Index>(nu)] = s.pi[i][static_cast<Eigen::Index>(old)];
    phi[nu] = s.phi[i][old];
  }
  s.theta[i] = std::move(theta);
  s.pi[i] = std::move(pi);
  s.phi[i] = std::move(phi);
  for (int& z : s.component[i]) z = perm[static_cast<std::size_t>(z)];
}

Metrics score_baseline(const ModelState& s, std::span<const Situation> train,
                       std::span<const Situation> test) {
  const auto majority = component_majority(s, train);
  auto correct = [&](const Lexeme& lex) {
    if (!lex.truth) return false;
    const auto p = predict_grounding(s, lex.surface);
    if (!p) return false;
    if (lex.truth->modality == Modality::Auxiliary) return p->modality == Modality::Auxiliary;
    if (p->modality != lex.truth->modality || !p->component) return false;
    const auto& label = majority[index_of(p->modality)][static_cast<std::size_t>(*p->component)];
    return label && *label == lex.truth->index;
  };
  Metrics out = score_occurrences(train, test, correct);
  for (const auto& v : s.corpus.vocabulary) {
    const auto p = predict_grounding(s, v);
    if (p && p->modality == Modality::Auxiliary) out.auxiliary.insert(v);
  }
  out.model = "baseline";
  return out;
}

}  // namespace cslg::bayes
