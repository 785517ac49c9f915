//------------------------------------------------------------------------------
//
//   Copyright 2026 The SFL Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sfl/clustering.hpp"
#include "sfl/common.hpp"
#include "sfl/dataio.hpp"
#include "sfl/random.hpp"

namespace sfl {

/// A client's strategic noise action: Gaussian mean and covariance over vec(R), in
/// representative-major order (all T entries of r^1, then r^2, ...).
///
/// Instances are validated on construction: Tr(Σ) <= V, Σ symmetric PSD (eigenvalues
/// >= -1e-10), and every μ component inside its box. Violations throw; nothing is
/// repaired. The symmetric square root of Σ is computed once and reused for sampling.
class NoiseAction
{
public:
  static constexpr double kEigenTolerance = 1e-10;

  struct Box
  {
    Vector lower;
    Vector upper;
  };

  NoiseAction() = default;

  /// Full covariance, row-major `mu.size() x mu.size()`. Empty `sigma` means Σ = 0.
  /// An empty box means unbounded.
  NoiseAction(Vector mu, Vector sigma, double trace_bound, Box box = {})
    : mu_(std::move(mu))
    , sigma_(std::move(sigma))
    , trace_bound_(trace_bound)
    , box_(std::move(box))
  {
    const std::size_t n = mu_.size();
    if (n == 0)
    {
      fail_parameter("noise action needs a non-empty mean");
    }
    if (!all_finite(mu_))
    {
      fail_parameter("noise mean must be finite");
    }
    if (!(trace_bound_ >= 0.0))
    {
      fail_parameter("trace bound V must be >= 0, got ", trace_bound_);
    }
    if (sigma_.empty())
    {
      sigma_.assign(n * n, 0.0);
    }
    if (sigma_.size() != n * n)
    {
      fail_parameter("covariance has ", sigma_.size(), " entries, expected ", n * n);
    }
    if (!all_finite(sigma_))
    {
      fail_parameter("covariance must be finite");
    }
    check_box();

    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
      trace += sigma_[i * n + i];
      for (std::size_t j = 0; j < i; ++j)
      {
        const double a = sigma_[i * n + j];
        const double b = sigma_[j * n + i];
        if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)))
        {
          fail_parameter("covariance is not symmetric at (", i, ", ", j, ")");
        }
      }
    }
    if (trace > trace_bound_ * (1.0 + 1e-12))
    {
      fail_parameter("Tr(Sigma) = ", trace, " exceeds the trace bound V = ", trace_bound_);
    }

    deterministic_ = std::all_of(sigma_.begin(), sigma_.end(), [](double v) { return v == 0.0; });
    if (!deterministic_)
    {
      factorize();
    }
  }

  /// Diagonal covariance from per-entry variances.
  static NoiseAction diagonal(Vector mu, const Vector &variances, double trace_bound, Box box = {})
  {
    const std::size_t n = mu.size();
    if (variances.size() != n)
    {
      fail_parameter("diagonal covariance has ", variances.size(), " entries, expected ", n);
    }
    Vector sigma(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
      sigma[i * n + i] = variances[i];
    }
    return NoiseAction(std::move(mu), std::move(sigma), trace_bound, std::move(box));
  }

  /// Zero noise of dimension `n`: truthful reporting.
  static NoiseAction truthful(std::size_t n) { return NoiseAction(Vector(n, 0.0), {}, 0.0); }

  const Vector &mu() const { return mu_; }
  const Vector &sigma() const { return sigma_; }
  double        trace_bound() const { return trace_bound_; }
  const Box    &box() const { return box_; }
  std::size_t   dim() const { return mu_.size(); }
  bool          deterministic() const { return deterministic_; }

  double trace() const
  {
    double t = 0.0;
    for (std::size_t i = 0; i < mu_.size(); ++i)
    {
      t += sigma_[i * mu_.size() + i];
    }
    return t;
  }

  /// Symmetric PSD factor L with L L^T = Σ (row-major); empty when Σ = 0.
  const Vector &factor() const { return factor_; }

private:
  void check_box() const
  {
    if (box_.lower.empty() && box_.upper.empty())
    {
      return;
    }
    if (box_.lower.size() != mu_.size() || box_.upper.size() != mu_.size())
    {
      fail_parameter("mean box bounds must have ", mu_.size(), " entries");
    }
    for (std::size_t i = 0; i < mu_.size(); ++i)
    {
      if (box_.lower[i] > box_.upper[i])
      {
        fail_parameter("mean box is empty in component ", i);
      }
      if (mu_[i] < box_.lower[i] || mu_[i] > box_.upper[i])
      {
        fail_parameter("mean component ", i, " = ", mu_[i], " outside [", box_.lower[i], ", ",
                       box_.upper[i], "]");
      }
    }
  }

  void factorize()
  {
    const auto      n = static_cast<Eigen::Index>(mu_.size());
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
      for (Eigen::Index j = 0; j < n; ++j)
      {
        s(i, j) = sigma_[static_cast<std::size_t>(i * n + j)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    if (eig.info() != Eigen::Success)
    {
      fail_parameter("covariance eigendecomposition failed");
    }
    Eigen::VectorXd values = eig.eigenvalues();
    if (values.minCoeff() < -kEigenTolerance)
    {
      fail_parameter("covariance is not positive semidefinite (min eigenvalue ",
                     values.minCoeff(), ")");
    }
    values = values.cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd root = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
    factor_.resize(mu_.size() * mu_.size());
    for (Eigen::Index i = 0; i < n; ++i)
    {
      for (Eigen::Index j = 0; j < n; ++j)
      {
        factor_[static_cast<std::size_t>(i * n + j)] = root(i, j);
      }
    }
  }

  Vector mu_;
  Vector sigma_;
  double trace_bound_{0.0};
  Box    box_;
  Vector factor_;
  bool   deterministic_{true};
};

/// One draw μ + L w with w standard normal. Σ = 0 returns μ exactly and leaves `rng` untouched.
inline Vector sample_noise(const NoiseAction &action, Rng &rng)
{
  if (action.deterministic())
  {
    return action.mu();
  }
  const std::size_t n = action.dim();
  Vector            w(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto &v : w)
  {
    v = normal(rng);
  }
  Vector        z = action.mu();
  const Vector &l = action.factor();
  for (std::size_t i = 0; i < n; ++i)
  {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
    {
      acc += l[i * n + j] * w[j];
    }
    z[i] += acc;
  }
  return z;
}

/// A model as seen by the fusion center: noisy, clipped at 0 by the client.
struct ReportedModel
{
  Representatives representatives;
  std::string     source_client;
};

inline Vector vec(const Representatives &reps)
{
  Vector out;
  for (const auto &r : reps)
  {
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

/// R + Z with Z one noise draw, reshaped and clipped at 0 from below.
inline ReportedModel report_model(const ClusterModel &model, const NoiseAction &action, Rng &rng,
                                  std::string source_client = {})
{
  const std::size_t k = model.k();
  const std::size_t t = model.dim();
  if (action.dim() != k * t)
  {
    fail_parameter("noise action has dimension ", action.dim(), ", model needs T*K = ", t * k);
  }
  const Vector  z = sample_noise(action, rng);
  ReportedModel out{model.representatives, std::move(source_client)};
  for (std::size_t c = 0; c < k; ++c)
  {
    for (std::size_t i = 0; i < t; ++i)
    {
      out.representatives[c][i] = std::max(0.0, out.representatives[c][i] + z[c * t + i]);
    }
  }
  return out;
}

/// Per-slot mean over all samples of a dataset.
inline Vector slot_average(const ClientDataset &data)
{
  validate(data);
  Vector avg(data.slots(), 0.0);
  for (const auto &s : data.samples)
  {
    for (std::size_t t = 0; t < avg.size(); ++t)
    {
      avg[t] += s[t];
    }
  }
  for (auto &v : avg)
  {
    v /= static_cast<double>(data.size());
  }
  return avg;
}

/// μ(i) = λ (0.5 - (a(i) - min a) / (max a - min a)) for slot averages a. Pushes the
/// report down where the client consumes most and up where it consumes least.
inline Vector heuristic_mean_from_average(const Vector &avg, double lambda)
{
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
  {
    fail_parameter("lambda must be finite and >= 0, got ", lambda);
  }
  Vector mu(avg.size(), 0.0);
  if (avg.empty() || lambda == 0.0)
  {
    return mu;
  }
  const auto [lo, hi] = std::minmax_element(avg.begin(), avg.end());
  const double range = *hi - *lo;
  if (!(range > 0.0))
  {
    return mu;
  }
  for (std::size_t i = 0; i < avg.size(); ++i)
  {
    mu[i] = lambda * (0.5 - (avg[i] - *lo) / range);
  }
  return mu;
}

inline Vector heuristic_mean(const ClientDataset &data, double lambda)
{
  return heuristic_mean_from_average(slot_average(data), lambda);
}

/// Repeat a T-vector for each of K representatives (representative-major).
inline Vector broadcast(const Vector &per_slot, std::size_t k)
{
  Vector out;
  out.reserve(per_slot.size() * k);
  for (std::size_t c = 0; c < k; ++c)
  {
    out.insert(out.end(), per_slot.begin(), per_slot.end());
  }
  return out;
}

}  // namespace sfl
