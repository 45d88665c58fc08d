#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "guessgame/analysis/stats.hpp"
#include "guessgame/core/errors.hpp"

namespace gg {

/// Log-normal accelerated failure time model:
///   log T_i ~ Normal(x_i' beta, sigma^2), right-censored where flagged.
/// Parameters are packed as theta = (beta_0 .. beta_{p-1}, log sigma).
struct AftData {
  Eigen::MatrixXd x;  // n x p, first column the intercept
  Eigen::VectorXd y;  // log durations
  std::vector<bool> censored;

  /// Intercept plus one covariate column.
  static AftData with_intercept(std::span<const double> log_durations, const std::vector<bool>& censored,
                                std::span<const double> covariate) {
    if (log_durations.size() != censored.size() || covariate.size() != censored.size())
      throw InvariantError("AFT inputs differ in length");
    AftData d;
    auto n = static_cast<Eigen::Index>(log_durations.size());
    d.x.resize(n, 2);
    d.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      d.x(i, 0) = 1.0;
      d.x(i, 1) = covariate[i];
      d.y(i) = log_durations[i];
    }
    d.censored.assign(censored.begin(), censored.end());
    return d;
  }

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return x.cols(); }
};

namespace aft_detail {

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

/// log of the standard normal survival function and the inverse Mills ratio
/// lambda = phi(z)/Phi_c(z), stable for large z.
struct Tail {
  double log_sf;
  double lambda;
};

inline Tail tail(double z) {
  double log_phi = -0.5 * z * z - kHalfLog2Pi;
  if (z < 25.0) {
    double sf = 0.5 * std::erfc(z / std::numbers::sqrt2);
    return {std::log(sf), std::exp(log_phi) / sf};
  }
  // Asymptotic Mills ratio; the truncation error is far below double precision here.
  double iz2 = 1.0 / (z * z);
  double series = 1.0 - iz2 * (1.0 - 3.0 * iz2 * (1.0 - 5.0 * iz2 * (1.0 - 7.0 * iz2)));
  double lambda = z / series;
  return {log_phi - std::log(lambda), lambda};
}

}  // namespace aft_detail

inline double aft_log_likelihood(const AftData& d, const Eigen::VectorXd& theta) {
  auto p = d.p();
  Eigen::VectorXd beta = theta.head(p);
  double eta = theta(p);
  double sigma = std::exp(eta);
  Eigen::VectorXd z = (d.y - d.x * beta) / sigma;
  double ll = 0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    if (d.censored[i]) {
      ll += aft_detail::tail(z(i)).log_sf;
    } else {
      ll += -eta - 0.5 * z(i) * z(i) - aft_detail::kHalfLog2Pi;
    }
  }
  return ll;
}

struct AftDerivatives {
  double log_likelihood = 0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Analytic log-likelihood, gradient and Hessian in theta = (beta, log sigma).
inline AftDerivatives aft_derivatives(const AftData& d, const Eigen::VectorXd& theta) {
  auto p = d.p();
  Eigen::VectorXd beta = theta.head(p);
  double eta = theta(p);
  double sigma = std::exp(eta);
  AftDerivatives out;
  out.gradient = Eigen::VectorXd::Zero(p + 1);
  out.hessian = Eigen::MatrixXd::Zero(p + 1, p + 1);
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    Eigen::VectorXd xi = d.x.row(i).transpose();
    double z = (d.y(i) - xi.dot(beta)) / sigma;
    double gb, ge, hbb, hbe, hee;  // per-observation derivative factors
    if (d.censored[i]) {
      auto t = aft_detail::tail(z);
      double lam = t.lambda;
      double dlam = lam * (lam - z);
      out.log_likelihood += t.log_sf;
      gb = lam / sigma;
      ge = lam * z;
      hbb = -dlam / (sigma * sigma);
      hbe = -(dlam * z + lam) / sigma;
      hee = -z * (dlam * z + lam);
    } else {
      out.log_likelihood += -eta - 0.5 * z * z - aft_detail::kHalfLog2Pi;
      gb = z / sigma;
      ge = -1.0 + z * z;
      hbb = -1.0 / (sigma * sigma);
      hbe = -2.0 * z / sigma;
      hee = -2.0 * z * z;
    }
    out.gradient.head(p) += gb * xi;
    out.gradient(p) += ge;
    out.hessian.topLeftCorner(p, p) += hbb * xi * xi.transpose();
    out.hessian.block(0, p, p, 1) += hbe * xi;
    out.hessian(p, p) += hee;
  }
  out.hessian.block(p, 0, 1, p) = out.hessian.block(0, p, p, 1).transpose();
  return out;
}

struct AftOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 200;
};

struct AftFit {
  std::vector<double> beta;
  double sigma = 0;
  double log_likelihood = 0;
  std::vector<double> std_errors;  // for beta
  std::vector<double> p_values;    // Wald, for beta
  int n = 0;
  int n_censored = 0;
  int iterations = 0;
  std::vector<double> ll_path;  // log-likelihood after each accepted step
  std::string distribution = "lognormal";
};

/// Maximum-likelihood fit by damped Newton (Levenberg-style) ascent.
inline AftFit fit_aft(const AftData& d, const AftOptions& opt = {}) {
  auto n = d.n();
  auto p = d.p();
  if (n < 10) throw InvariantError("AFT fit needs at least 10 observations");
  int n_cens = static_cast<int>(std::count(d.censored.begin(), d.censored.end(), true));
  if (n_cens == n) throw InvariantError("AFT fit with every observation censored");
  if (static_cast<Eigen::Index>(d.censored.size()) != n || d.x.rows() != n)
    throw InvariantError("AFT design dimensions disagree");

  // Start from least squares on the events.
  Eigen::MatrixXd xe(n - n_cens, p);
  Eigen::VectorXd ye(n - n_cens);
  for (Eigen::Index i = 0, k = 0; i < n; ++i) {
    if (d.censored[i]) continue;
    xe.row(k) = d.x.row(i);
    ye(k++) = d.y(i);
  }
  Eigen::VectorXd theta(p + 1);
  theta.head(p) = xe.colPivHouseholderQr().solve(ye);
  double resid = (ye - xe * theta.head(p)).norm() / std::sqrt(static_cast<double>(std::max<Eigen::Index>(ye.size(), 1)));
  theta(p) = std::log(std::max(resid, 1e-3));

  AftFit fit;
  auto cur = aft_derivatives(d, theta);
  fit.ll_path.push_back(cur.log_likelihood);
  double mu = 0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (cur.gradient.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) break;
    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      Eigen::MatrixXd a = -cur.hessian;
      a.diagonal().array() += mu;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
      bool pd = ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all();
      if (pd) {
        Eigen::VectorXd cand = theta + ldlt.solve(cur.gradient);
        double ll = aft_log_likelihood(d, cand);
        // Rounding-level slack so the final quadratic steps are not rejected.
        double slack = 1e-13 * std::max(1.0, std::abs(cur.log_likelihood));
        if (std::isfinite(ll) && ll >= cur.log_likelihood - slack) {
          theta = cand;
          cur = aft_derivatives(d, theta);
          fit.ll_path.push_back(cur.log_likelihood);
          mu = mu * 0.1;
          if (mu < 1e-10) mu = 0;
          accepted = true;
          break;
        }
      }
      mu = mu == 0 ? 1e-4 * std::max(1.0, a.diagonal().cwiseAbs().maxCoeff()) : mu * 10;
    }
    if (!accepted) break;
  }
  if (cur.gradient.lpNorm<Eigen::Infinity>() >= opt.gradient_tolerance)
    throw NumericalError("AFT fit did not converge (gradient " +
                         std::to_string(cur.gradient.lpNorm<Eigen::Infinity>()) + ")");

  Eigen::MatrixXd info = -cur.hessian;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0).all())
    throw NumericalError("singular observed information matrix");
  Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p + 1, p + 1));

  fit.n = static_cast<int>(n);
  fit.n_censored = n_cens;
  fit.iterations = it;
  fit.log_likelihood = cur.log_likelihood;
  fit.sigma = std::exp(theta(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    double se = std::sqrt(cov(j, j));
    fit.beta.push_back(theta(j));
    fit.std_errors.push_back(se);
    fit.p_values.push_back(stats::wald_p_value(theta(j) / se));
  }
  return fit;
}

inline AftFit fit_aft(std::span<const double> log_durations, const std::vector<bool>& censored,
                      std::span<const double> covariate, const AftOptions& opt = {}) {
  return fit_aft(AftData::with_intercept(log_durations, censored, covariate), opt);
}

}  // namespace gg
