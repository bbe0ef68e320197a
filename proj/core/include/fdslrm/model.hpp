#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace fdslrm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class TermKind { constant, cosine, sine, polynomial };

/// Frequency given exactly as 2*pi*index/period.
struct Harmonic {
  long index = 0;
  long period = 1;

  bool operator==(const Harmonic&) const = default;
};

/// One regressor function evaluated on t = 1, 2, ..., n.
///
/// Trigonometric terms built from a harmonic keep the exact rational form of
/// their frequency; evaluation reduces h*t modulo the period in integer
/// arithmetic so quarter-period values come out exact.
class TermSpec {
 public:
  static TermSpec constant();
  static TermSpec polynomial(int power);
  static TermSpec cosine(double frequency);
  static TermSpec sine(double frequency);
  static TermSpec cosine_harmonic(long index, long period);
  static TermSpec sine_harmonic(long index, long period);

  TermKind kind() const noexcept { return kind_; }
  double frequency() const noexcept { return frequency_; }
  int power() const noexcept { return power_; }
  const std::optional<Harmonic>& harmonic() const noexcept { return harmonic_; }

  double operator()(long t) const;

  std::string describe() const;

  bool operator==(const TermSpec&) const = default;

 private:
  TermSpec(TermKind kind, double frequency, int power, std::optional<Harmonic> harmonic);

  TermKind kind_;
  double frequency_;
  int power_;
  std::optional<Harmonic> harmonic_;
};

struct ModelSpec {
  long n = 0;
  std::vector<TermSpec> trend;
  std::vector<TermSpec> random;

  long k() const noexcept { return static_cast<long>(trend.size()); }
  long l() const noexcept { return static_cast<long>(random.size()); }

  /// Throws Error(invalid_model) unless n > k + l.
  void validate() const;

  bool operator==(const ModelSpec&) const = default;
};

struct DesignTolerances {
  double rank_ratio = 1e-10;
  double orthogonality = 1e-10;
  double degenerate_column = 1e-12;
};

/// Realized design matrices F (n x k) and V (n x l) with the Gram and Schur
/// products every estimator needs. Immutable once built.
class DesignSet {
 public:
  /// Validates rank and column norms and decides orthogonality numerically.
  static DesignSet from_matrices(MatrixXd F, MatrixXd V, const DesignTolerances& tol = {});

  long n() const noexcept { return F_.rows(); }
  long k() const noexcept { return F_.cols(); }
  long l() const noexcept { return V_.cols(); }

  const MatrixXd& F() const noexcept { return F_; }
  const MatrixXd& V() const noexcept { return V_; }
  bool is_orthogonal() const noexcept { return orthogonal_; }
  const VectorXd& column_norms_sq() const noexcept { return norms_sq_; }

  const MatrixXd& ftf() const noexcept { return ftf_; }
  const MatrixXd& ftf_inv() const noexcept { return ftf_inv_; }
  const MatrixXd& ftv() const noexcept { return ftv_; }
  const MatrixXd& vtv() const noexcept { return vtv_; }
  /// Schur complement W = V' M_F V.
  const MatrixXd& w() const noexcept { return w_; }
  /// M_F V, the trend-projected random design.
  const MatrixXd& mf_v() const noexcept { return mf_v_; }

  /// y - F (F'F)^{-1} F' y without forming the n x n projector.
  VectorXd apply_mf(const VectorXd& y) const;
  MatrixXd apply_mf(const MatrixXd& y) const;
  /// Dense M_F; O(n^2) memory, intended for small-n checks.
  MatrixXd projector() const;

  /// max |F'V| and max off-diagonal |V'V|, each scaled by the column norms.
  double orthogonality_defect() const;

 private:
  DesignSet() = default;
  static DesignSet build(MatrixXd F, MatrixXd V, std::optional<bool> structural_orthogonal,
                         const DesignTolerances& tol);

  friend DesignSet realize(const ModelSpec& spec, const DesignTolerances& tol);

  MatrixXd F_;
  MatrixXd V_;
  bool orthogonal_ = false;
  VectorXd norms_sq_;
  MatrixXd ftf_;
  MatrixXd ftf_inv_;
  MatrixXd ftv_;
  MatrixXd vtv_;
  MatrixXd w_;
  MatrixXd mf_v_;
};

/// F[t-1, i] = trend_i(t), V[t-1, j] = random_j(t) for t = 1..n.
DesignSet realize(const ModelSpec& spec, const DesignTolerances& tol = {});

/// True when every trend/random and random/random pair is provably orthogonal
/// on t = 1..n from the harmonic indices alone. False means "unknown".
bool structurally_orthogonal(const ModelSpec& spec);

}  // namespace fdslrm
