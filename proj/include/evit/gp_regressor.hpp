#pragma once

// Exact Gaussian-process regression with an isotropic RBF kernel and a
// constant mean, used by the quality meta-model in logit space.

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "evit/error.hpp"

namespace evit {

class GaussianProcessRegressor {
 public:
  struct Hyperparameters {
    double lengthscale = 1.0;
    double signal_variance = 1.0;
    double noise_variance = 1e-6;
    double mean = 0.0;
  };

  struct Prediction {
    double mean = 0.0;
    double latent_variance = 0.0;  // uncertainty of the regression function
    double variance = 0.0;         // latent + observation noise
  };

  static constexpr double kNoiseFloor = 1e-6;
  static constexpr double kMinLengthscale = 1e-2;
  static constexpr double kMaxLengthscale = 10.0;

  GaussianProcessRegressor() = default;

  /// Type-II maximum likelihood fit. The signal variance is profiled out in
  /// closed form; lengthscale and noise ratio are found by coordinate-wise
  /// Brent searches from a fixed grid of starting points, so the result is
  /// deterministic. Rows are put in canonical order first, which makes the
  /// fit independent of input order.
  static GaussianProcessRegressor fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets) {
    if (inputs.rows() != targets.size()) throw ValidationError("gp fit: inputs and targets differ in length");
    if (inputs.rows() < 2) throw PreconditionError("gp fit: need at least 2 training points");
    if (!inputs.allFinite() || !targets.allFinite()) throw NumericalError("gp fit: non-finite training data");
    canonicalise(inputs, targets);

    const double mean = targets.mean();
    const Eigen::VectorXd r = targets.array() - mean;
    const Eigen::MatrixXd sqdist = squared_distances(inputs, inputs);

    auto objective = [&](double log_l, double log_g) {
      return profiled_nll(sqdist, r, std::exp(log_l), std::exp(log_g)).nll;
    };

    const double lo_l = std::log(kMinLengthscale), hi_l = std::log(kMaxLengthscale);
    const double lo_g = std::log(1e-6), hi_g = std::log(1e2);
    struct Point {
      double log_l, log_g, value;
    };
    std::vector<Point> starts;
    for (double l : {0.05, 0.2, 1.0, 3.0})
      for (double g : {1e-4, 1e-2, 1.0}) starts.push_back({std::log(l), std::log(g), objective(std::log(l), std::log(g))});
    std::stable_sort(starts.begin(), starts.end(), [](const Point& a, const Point& b) { return a.value < b.value; });

    Point best = starts.front();
    for (std::size_t s = 0; s < std::min<std::size_t>(3, starts.size()); ++s) {
      Point p = starts[s];
      for (int sweep = 0; sweep < 12; ++sweep) {
        const double before = p.value;
        std::uintmax_t iters = 60;
        auto rl = boost::math::tools::brent_find_minima([&](double x) { return objective(x, p.log_g); }, lo_l, hi_l,
                                                        40, iters);
        if (rl.second < p.value) p = {rl.first, p.log_g, rl.second};
        iters = 60;
        auto rg = boost::math::tools::brent_find_minima([&](double x) { return objective(p.log_l, x); }, lo_g, hi_g,
                                                        40, iters);
        if (rg.second < p.value) p = {p.log_l, rg.first, rg.second};
        if (before - p.value < 1e-9) break;
      }
      if (p.value < best.value) best = p;
    }

    const auto prof = profiled_nll(sqdist, r, std::exp(best.log_l), std::exp(best.log_g));
    if (!std::isfinite(prof.nll)) throw NumericalError("gp fit: marginal likelihood is not finite at any start");
    Hyperparameters h;
    h.lengthscale = std::exp(best.log_l);
    h.signal_variance = prof.signal_variance;
    h.noise_variance = std::max(kNoiseFloor, std::exp(best.log_g) * prof.signal_variance);
    h.mean = mean;
    return from_parameters(std::move(inputs), std::move(targets), h);
  }

  /// Rebuilds a fitted model from stored hyper-parameters and training data.
  static GaussianProcessRegressor from_parameters(Eigen::MatrixXd inputs, Eigen::VectorXd targets, Hyperparameters h) {
    if (inputs.rows() != targets.size()) throw ValidationError("gp: inputs and targets differ in length");
    if (!(h.lengthscale > 0.0) || !(h.signal_variance >= 0.0) || !(h.noise_variance >= 0.0))
      throw ValidationError("gp: invalid hyper-parameters");
    GaussianProcessRegressor gp;
    gp.inputs_ = std::move(inputs);
    gp.targets_ = std::move(targets);
    gp.h_ = h;
    if (gp.inputs_.rows() > 0 && h.signal_variance > 0.0) {
      Eigen::MatrixXd K = h.signal_variance * rbf(squared_distances(gp.inputs_, gp.inputs_), h.lengthscale);
      K.diagonal().array() += std::max(h.noise_variance, 1e-12 * h.signal_variance);
      gp.llt_.compute(K);
      if (gp.llt_.info() != Eigen::Success) throw NumericalError("gp: covariance matrix is not positive definite");
      gp.alpha_ = gp.llt_.solve((gp.targets_.array() - h.mean).matrix());
    }
    return gp;
  }

  Prediction predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    Prediction p;
    p.mean = h_.mean;
    p.latent_variance = h_.signal_variance;
    if (alpha_.size() > 0) {
      if (x.size() != inputs_.cols()) throw ValidationError("gp predict: input dimension mismatch");
      const Eigen::VectorXd k = h_.signal_variance * rbf(squared_distances(x, inputs_), h_.lengthscale).transpose();
      p.mean += k.dot(alpha_);
      p.latent_variance = std::max(0.0, h_.signal_variance - k.dot(llt_.solve(k)));
    }
    p.variance = p.latent_variance + h_.noise_variance;
    return p;
  }

  /// Negative log marginal likelihood at the stored hyper-parameters.
  double negative_log_likelihood() const {
    if (inputs_.rows() == 0 || alpha_.size() == 0) return std::numeric_limits<double>::quiet_NaN();
    const Eigen::VectorXd r = targets_.array() - h_.mean;
    const Eigen::MatrixXd L = llt_.matrixL();
    return 0.5 * r.dot(alpha_) + L.diagonal().array().log().sum() +
           0.5 * static_cast<double>(r.size()) * std::log(2.0 * M_PI);
  }

  const Hyperparameters& hyperparameters() const { return h_; }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }

 private:
  struct Profiled {
    double nll;
    double signal_variance;
  };

  static Eigen::MatrixXd squared_distances(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                           const Eigen::Ref<const Eigen::MatrixXd>& b) {
    Eigen::MatrixXd d(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      for (Eigen::Index i = 0; i < a.rows(); ++i) d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
    return d;
  }

  static Eigen::MatrixXd rbf(const Eigen::MatrixXd& sqdist, double lengthscale) {
    return (-sqdist / (2.0 * lengthscale * lengthscale)).array().exp().matrix();
  }

  // NLL with K = s2 (R + g I) and s2 at its closed-form optimum r^T (R+gI)^-1 r / n.
  static Profiled profiled_nll(const Eigen::MatrixXd& sqdist, const Eigen::VectorXd& r, double lengthscale, double g) {
    const double n = static_cast<double>(r.size());
    Eigen::MatrixXd A = rbf(sqdist, lengthscale);
    A.diagonal().array() += g;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) return {std::numeric_limits<double>::infinity(), 0.0};
    const double quad = r.dot(llt.solve(r));
    // Floor keeps constant-target data finite; it is far below the noise floor.
    const double s2 = std::max(quad / n, 1e-12);
    const Eigen::MatrixXd L = llt.matrixL();
    const double logdet_a = 2.0 * L.diagonal().array().log().sum();
    const double nll = 0.5 * n * std::log(s2) + 0.5 * logdet_a + 0.5 * quad / s2 + 0.5 * n * std::log(2.0 * M_PI);
    return {nll, s2};
  }

  static void canonicalise(Eigen::MatrixXd& inputs, Eigen::VectorXd& targets) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(inputs.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      for (Eigen::Index j = 0; j < inputs.cols(); ++j)
        if (inputs(a, j) != inputs(b, j)) return inputs(a, j) < inputs(b, j);
      return targets(a) < targets(b);
    });
    Eigen::MatrixXd x(inputs.rows(), inputs.cols());
    Eigen::VectorXd y(targets.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = inputs.row(order[i]);
      y(static_cast<Eigen::Index>(i)) = targets(order[i]);
    }
    inputs = std::move(x);
    targets = std::move(y);
  }

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  Hyperparameters h_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

}  // namespace evit
