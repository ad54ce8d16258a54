#pragma once

#include <Eigen/Dense>
#include <vector>

namespace matnet::clustering {

enum class KernelType { Linear, Polynomial, Rbf };

struct KernelSpec {
  KernelType type = KernelType::Rbf;
  double gamma = 0.5;  ///< RBF width and polynomial scale
  double coef0 = 1.0;
  int degree = 3;
};

double kernel_value(const KernelSpec& k, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Soft-margin binary classifier trained by sequential minimal optimization
/// with maximal-violating-pair selection. Labels are +1 / -1.
class BinarySvm {
public:
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& y, double c, const KernelSpec& kernel,
           double tol = 1e-8, long max_iter = 1000000);
  double decision(const Eigen::VectorXd& p) const;
  long iterations() const { return iterations_; }

private:
  KernelSpec kernel_;
  Eigen::MatrixXd sv_;
  Eigen::VectorXd coef_;  ///< alpha_i * y_i for support vectors
  double bias_ = 0.0;
  long iterations_ = 0;
};

/// One-vs-rest multi-class classifier over 2-D coordinates, trained on
/// standardized inputs.
class MultiClassSvm {
public:
  /// `labels` are arbitrary non-negative ids; a single class is allowed.
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& labels, double c, const KernelSpec& kernel);
  int predict(const Eigen::VectorXd& p) const;
  const std::vector<int>& classes() const { return classes_; }
  double training_accuracy() const { return accuracy_; }

private:
  Eigen::VectorXd standardize(const Eigen::VectorXd& p) const;

  std::vector<int> classes_;
  std::vector<BinarySvm> machines_;
  Eigen::VectorXd mean_, scale_;
  double accuracy_ = 0.0;
};

}  // namespace matnet::clustering
