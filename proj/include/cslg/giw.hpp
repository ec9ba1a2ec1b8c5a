#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include <Eigen/Dense>

#include "cslg/core.hpp"
#include "cslg/rng.hpp"

namespace cslg {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Gaussian-Inverse-Wishart (normal-inverse-Wishart) parameters:
/// Sigma ~ IW(scale, dof), mu | Sigma ~ N(mean, Sigma / kappa).
template <typename Scalar>
struct NiwParams {
  Vec<Scalar> mean;
  Scalar kappa = 1;
  Mat<Scalar> scale;
  Scalar dof = 1;

  Eigen::Index dim() const { return mean.size(); }
};

template <typename Scalar>
struct Gaussian {
  Vec<Scalar> mean;
  Mat<Scalar> cov;
};

/// Conjugate update of a NIW prior by the columns of `data` (dim x n).
template <typename Scalar>
NiwParams<Scalar> niw_posterior(const NiwParams<Scalar>& prior,
                                const Eigen::Ref<const Mat<Scalar>>& data) {
  const Eigen::Index n = data.cols();
  if (data.rows() != prior.dim() && n > 0)
    throw DimensionMismatch("niw_posterior: data dimension " + std::to_string(data.rows()) +
                            " vs prior " + std::to_string(prior.dim()));
  if (n == 0) return prior;

  const Vec<Scalar> xbar = data.rowwise().mean();
  const Mat<Scalar> centered = data.colwise() - xbar;
  const Vec<Scalar> shift = xbar - prior.mean;
  const Scalar nn = static_cast<Scalar>(n);

  NiwParams<Scalar> post;
  post.kappa = prior.kappa + nn;
  post.dof = prior.dof + nn;
  post.mean = (prior.kappa * prior.mean + nn * xbar) / post.kappa;
  post.scale = prior.scale + centered * centered.transpose() +
               (prior.kappa * nn / post.kappa) * shift * shift.transpose();
  post.scale = Scalar(0.5) * (post.scale + post.scale.transpose());
  return post;
}

/// Sigma ~ IW(scale, dof) via the Bartlett decomposition of the Wishart
/// W = Sigma^-1 ~ W(scale^-1, dof). Returns nullopt if a factorization fails.
template <typename Scalar>
std::optional<Mat<Scalar>> sample_inverse_wishart(const Mat<Scalar>& scale, Scalar dof, Rng& rng) {
  const Eigen::Index d = scale.rows();
  Eigen::LLT<Mat<Scalar>> scale_llt(scale);
  if (scale_llt.info() != Eigen::Success) return std::nullopt;
  const Mat<Scalar> scale_inv = scale_llt.solve(Mat<Scalar>::Identity(d, d));
  Eigen::LLT<Mat<Scalar>> inv_llt(Scalar(0.5) * (scale_inv + scale_inv.transpose()));
  if (inv_llt.info() != Eigen::Success) return std::nullopt;

  Mat<Scalar> bartlett = Mat<Scalar>::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    bartlett(i, i) = static_cast<Scalar>(std::sqrt(rng.chi_squared(static_cast<double>(dof - i))));
    for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = static_cast<Scalar>(rng.normal());
  }
  // W = (L A)(L A)^T, so Sigma = (L A)^-T (L A)^-1.
  const Mat<Scalar> la = inv_llt.matrixL() * bartlett;
  const Mat<Scalar> la_inv =
      la.template triangularView<Eigen::Lower>().solve(Mat<Scalar>::Identity(d, d));
  Mat<Scalar> sigma = la_inv.transpose() * la_inv;
  sigma = Scalar(0.5) * (sigma + sigma.transpose());
  return sigma;
}

template <typename Scalar>
std::optional<Gaussian<Scalar>> sample_niw(const NiwParams<Scalar>& p, Rng& rng) {
  auto sigma = sample_inverse_wishart<Scalar>(p.scale, p.dof, rng);
  if (!sigma) return std::nullopt;
  Eigen::LLT<Mat<Scalar>> llt(*sigma / p.kappa);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Vec<Scalar> z(p.dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = static_cast<Scalar>(rng.normal());
  return Gaussian<Scalar>{p.mean + llt.matrixL() * z, std::move(*sigma)};
}

/// Cached Cholesky factor of a Gaussian for repeated density evaluation.
template <typename Scalar>
class GaussianDensity {
 public:
  explicit GaussianDensity(const Gaussian<Scalar>& g) : mean_(g.mean), llt_(g.cov) {
    ok_ = llt_.info() == Eigen::Success;
    if (ok_) log_norm_ = -Scalar(0.5) * static_cast<Scalar>(mean_.size()) *
                             std::log(Scalar(2) * std::numbers::pi_v<Scalar>) -
                         llt_.matrixLLT().diagonal().array().log().sum();
  }

  bool ok() const { return ok_; }

  Scalar log_density(const Eigen::Ref<const Vec<Scalar>>& x) const {
    const Vec<Scalar> z = llt_.matrixL().solve(x - mean_);
    return log_norm_ - Scalar(0.5) * z.squaredNorm();
  }

 private:
  Vec<Scalar> mean_;
  Eigen::LLT<Mat<Scalar>> llt_;
  Scalar log_norm_ = 0;
  bool ok_ = false;
};

/// log Gamma_d(a), the multivariate gamma function.
template <typename Scalar>
Scalar log_multigamma(Scalar a, Eigen::Index d) {
  Scalar r = static_cast<Scalar>(d * (d - 1)) / Scalar(4) * std::log(std::numbers::pi_v<Scalar>);
  for (Eigen::Index j = 0; j < d; ++j) r += std::lgamma(a - static_cast<Scalar>(j) / Scalar(2));
  return r;
}

/// log p(data) with the Gaussian parameters integrated out under the NIW prior.
template <typename Scalar>
Scalar niw_log_marginal(const NiwParams<Scalar>& prior, const Eigen::Ref<const Mat<Scalar>>& data) {
  const Eigen::Index n = data.cols();
  if (n == 0) return 0;
  const Eigen::Index d = prior.dim();
  const auto post = niw_posterior(prior, data);
  auto logdet = [](const Mat<Scalar>& m) {
    Eigen::LLT<Mat<Scalar>> llt(m);
    return Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
  };
  return -Scalar(0.5) * static_cast<Scalar>(n * d) * std::log(std::numbers::pi_v<Scalar>) +
         log_multigamma(post.dof / 2, d) - log_multigamma(prior.dof / 2, d) +
         prior.dof / 2 * logdet(prior.scale) - post.dof / 2 * logdet(post.scale) +
         static_cast<Scalar>(d) / 2 * (std::log(prior.kappa) - std::log(post.kappa));
}

}  // namespace cslg
