#include "matnet/clustering/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matnet/error.hpp"

namespace matnet::clustering {

double kernel_value(const KernelSpec& k, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  switch (k.type) {
    case KernelType::Linear:
      return a.dot(b);
    case KernelType::Polynomial:
      return std::pow(k.gamma * a.dot(b) + k.coef0, k.degree);
    case KernelType::Rbf:
      return std::exp(-k.gamma * (a - b).squaredNorm());
  }
  return 0.0;
}

void BinarySvm::fit(const Eigen::MatrixXd& x, const std::vector<int>& y, double c, const KernelSpec& kernel,
                    double tol, long max_iter) {
  const Eigen::Index n = x.rows();
  if (static_cast<std::size_t>(n) != y.size() || n == 0) throw ConfigError("svm: label count mismatch");
  if (!(c > 0.0)) throw ConfigError("svm: regularization C must be positive");
  kernel_ = kernel;
  Eigen::VectorXd yy(n);
  for (Eigen::Index i = 0; i < n; ++i) yy(i) = y[static_cast<std::size_t>(i)] > 0 ? 1.0 : -1.0;

  Eigen::MatrixXd q(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      q(i, j) = q(j, i) = yy(i) * yy(j) * kernel_value(kernel, x.row(i).transpose(), x.row(j).transpose());

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
  auto in_up = [&](Eigen::Index t) { return (yy(t) > 0 && alpha(t) < c) || (yy(t) < 0 && alpha(t) > 0); };
  auto in_low = [&](Eigen::Index t) { return (yy(t) > 0 && alpha(t) > 0) || (yy(t) < 0 && alpha(t) < c); };

  iterations_ = 0;
  while (iterations_ < max_iter) {
    Eigen::Index i = -1, j = -1;
    double gmax = -std::numeric_limits<double>::infinity(), gmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -yy(t) * grad(t);
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < tol) break;
    ++iterations_;

    const double ai_old = alpha(i), aj_old = alpha(j);
    double quad = q(i, i) + q(j, j) - 2.0 * yy(i) * yy(j) * q(i, j);
    if (quad <= 0.0) quad = 1e-12;
    if (yy(i) != yy(j)) {
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0 && alpha(j) < 0) {
        alpha(j) = 0;
        alpha(i) = diff;
      } else if (diff <= 0 && alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = -diff;
      }
      if (diff > 0 && alpha(i) > c) {
        alpha(i) = c;
        alpha(j) = c - diff;
      } else if (diff <= 0 && alpha(j) > c) {
        alpha(j) = c;
        alpha(i) = c + diff;
      }
    } else {
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > c && alpha(i) > c) {
        alpha(i) = c;
        alpha(j) = sum - c;
      } else if (sum <= c && alpha(j) < 0) {
        alpha(j) = 0;
        alpha(i) = sum;
      }
      if (sum > c && alpha(j) > c) {
        alpha(j) = c;
        alpha(i) = sum - c;
      } else if (sum <= c && alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = sum;
      }
    }
    const double di = alpha(i) - ai_old, dj = alpha(j) - aj_old;
    grad += q.col(i) * di + q.col(j) * dj;
  }

  double b_sum = 0.0;
  int n_free = 0;
  double ub = std::numeric_limits<double>::infinity(), lb = -ub;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = yy(t) * grad(t);
    if (alpha(t) > 0 && alpha(t) < c) {
      b_sum += yg;
      ++n_free;
    } else if ((yy(t) > 0 && alpha(t) >= c) || (yy(t) < 0 && alpha(t) <= 0)) {
      lb = std::max(lb, yg);
    } else {
      ub = std::min(ub, yg);
    }
  }
  const double rho = n_free > 0 ? b_sum / n_free : 0.5 * (ub + lb);
  bias_ = std::isfinite(rho) ? -rho : 0.0;

  std::vector<Eigen::Index> idx;
  for (Eigen::Index t = 0; t < n; ++t)
    if (alpha(t) > 0) idx.push_back(t);
  sv_.resize(static_cast<Eigen::Index>(idx.size()), x.cols());
  coef_.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) {
    sv_.row(static_cast<Eigen::Index>(a)) = x.row(idx[a]);
    coef_(static_cast<Eigen::Index>(a)) = alpha(idx[a]) * yy(idx[a]);
  }
}

double BinarySvm::decision(const Eigen::VectorXd& p) const {
  double s = bias_;
  for (Eigen::Index a = 0; a < sv_.rows(); ++a) s += coef_(a) * kernel_value(kernel_, sv_.row(a).transpose(), p);
  return s;
}

Eigen::VectorXd MultiClassSvm::standardize(const Eigen::VectorXd& p) const {
  return (p - mean_).cwiseQuotient(scale_);
}

void MultiClassSvm::fit(const Eigen::MatrixXd& x, const std::vector<int>& labels, double c,
                        const KernelSpec& kernel) {
  const Eigen::Index n = x.rows();
  if (n == 0 || static_cast<std::size_t>(n) != labels.size()) throw ConfigError("svm: label count mismatch");
  mean_ = x.colwise().mean().transpose();
  scale_.resize(x.cols());
  for (Eigen::Index d = 0; d < x.cols(); ++d) {
    const double sd = std::sqrt((x.col(d).array() - mean_(d)).square().mean());
    scale_(d) = sd > 0.0 ? sd : 1.0;
  }
  Eigen::MatrixXd xs(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) xs.row(i) = standardize(x.row(i).transpose()).transpose();

  classes_ = labels;
  std::sort(classes_.begin(), classes_.end());
  classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
  machines_.clear();
  if (classes_.size() > 1) {
    for (int cl : classes_) {
      std::vector<int> y(labels.size());
      for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == cl ? 1 : -1;
      machines_.emplace_back();
      machines_.back().fit(xs, y, c, kernel);
    }
  }
  int correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) correct += predict(x.row(i).transpose()) == labels[static_cast<std::size_t>(i)];
  accuracy_ = static_cast<double>(correct) / static_cast<double>(n);
}

int MultiClassSvm::predict(const Eigen::VectorXd& p) const {
  if (classes_.empty()) throw ConfigError("svm: model is not trained");
  if (machines_.empty()) return classes_.front();
  const Eigen::VectorXd s = standardize(p);
  std::size_t best = 0;
  double bv = machines_[0].decision(s);
  for (std::size_t a = 1; a < machines_.size(); ++a) {
    const double v = machines_[a].decision(s);
    if (v > bv) {
      bv = v;
      best = a;
    }
  }
  return classes_[best];
}

}  // namespace matnet::clustering
