#include "fdslrm/model.hpp"

#include "fdslrm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fdslrm {

namespace {

constexpr double kPi = std::numbers::pi;

// (index, 0) for constants, (h, period) for harmonic cos/sin; nullopt otherwise.
struct HarmonicKey {
  TermKind kind;
  long index;
  long period;
};

std::optional<HarmonicKey> harmonic_key(const TermSpec& term) {
  switch (term.kind()) {
    case TermKind::constant:
      return HarmonicKey{TermKind::cosine, 0, 0};
    case TermKind::polynomial:
      if (term.power() == 0) return HarmonicKey{TermKind::cosine, 0, 0};
      return std::nullopt;
    case TermKind::cosine:
    case TermKind::sine:
      if (!term.harmonic()) return std::nullopt;
      return HarmonicKey{term.kind(), term.harmonic()->index, term.harmonic()->period};
  }
  return std::nullopt;
}

// Discrete trigonometric orthogonality over one full period t = 1..n.
bool pair_orthogonal(const TermSpec& a, const TermSpec& b, long n) {
  auto ka = harmonic_key(a);
  auto kb = harmonic_key(b);
  if (!ka || !kb) return false;
  if (ka->index != 0 && ka->period != n) return false;
  if (kb->index != 0 && kb->period != n) return false;
  if (ka->kind != kb->kind) return true;
  return ka->index != kb->index;
}

}  // namespace

TermSpec::TermSpec(TermKind kind, double frequency, int power, std::optional<Harmonic> harmonic)
    : kind_(kind), frequency_(frequency), power_(power), harmonic_(harmonic) {}

TermSpec TermSpec::constant() { return {TermKind::constant, 0.0, 0, std::nullopt}; }

TermSpec TermSpec::polynomial(int power) {
  if (power < 0) throw Error(ErrorCode::invalid_term, "polynomial power must be >= 0");
  return {TermKind::polynomial, 0.0, power, std::nullopt};
}

TermSpec TermSpec::cosine(double frequency) {
  if (!(frequency > 0.0 && frequency <= kPi))
    throw Error(ErrorCode::invalid_term, "cosine frequency must lie in (0, pi]");
  return {TermKind::cosine, frequency, 0, std::nullopt};
}

TermSpec TermSpec::sine(double frequency) {
  if (!(frequency > 0.0 && frequency < kPi))
    throw Error(ErrorCode::invalid_term, "sine frequency must lie in (0, pi)");
  return {TermKind::sine, frequency, 0, std::nullopt};
}

TermSpec TermSpec::cosine_harmonic(long index, long period) {
  if (period < 1 || index < 1 || 2 * index > period)
    throw Error(ErrorCode::invalid_term, "cosine harmonic must satisfy 1 <= h <= n/2");
  return {TermKind::cosine, 2.0 * kPi * static_cast<double>(index) / static_cast<double>(period), 0,
          Harmonic{index, period}};
}

TermSpec TermSpec::sine_harmonic(long index, long period) {
  if (period < 1 || index < 1 || 2 * index >= period)
    throw Error(ErrorCode::invalid_term, "sine harmonic must satisfy 1 <= h < n/2");
  return {TermKind::sine, 2.0 * kPi * static_cast<double>(index) / static_cast<double>(period), 0,
          Harmonic{index, period}};
}

double TermSpec::operator()(long t) const {
  switch (kind_) {
    case TermKind::constant:
      return 1.0;
    case TermKind::polynomial:
      return power_ == 0 ? 1.0 : std::pow(static_cast<double>(t), power_);
    case TermKind::cosine:
    case TermKind::sine:
      break;
  }
  const bool is_cos = kind_ == TermKind::cosine;
  if (!harmonic_) {
    const double angle = frequency_ * static_cast<double>(t);
    return is_cos ? std::cos(angle) : std::sin(angle);
  }
  const long period = harmonic_->period;
  long m = (harmonic_->index * t) % period;
  if (m < 0) m += period;
  if (m == 0) return is_cos ? 1.0 : 0.0;
  if (2 * m == period) return is_cos ? -1.0 : 0.0;
  if (4 * m == period) return is_cos ? 0.0 : 1.0;
  if (4 * m == 3 * period) return is_cos ? 0.0 : -1.0;
  const double angle = 2.0 * kPi * static_cast<double>(m) / static_cast<double>(period);
  return is_cos ? std::cos(angle) : std::sin(angle);
}

std::string TermSpec::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case TermKind::constant:
      return "const";
    case TermKind::polynomial:
      out << "t^" << power_;
      return out.str();
    case TermKind::cosine:
      out << "cos";
      break;
    case TermKind::sine:
      out << "sin";
      break;
  }
  if (harmonic_)
    out << "(2pi*" << harmonic_->index << "/" << harmonic_->period << " t)";
  else
    out << "(" << frequency_ << " t)";
  return out.str();
}

void ModelSpec::validate() const {
  if (n < 1) throw Error(ErrorCode::invalid_model, "n must be positive");
  if (n <= k() + l()) {
    std::ostringstream msg;
    msg << "identifiability requires n > k + l (n=" << n << ", k=" << k() << ", l=" << l() << ")";
    throw Error(ErrorCode::invalid_model, msg.str());
  }
}

bool structurally_orthogonal(const ModelSpec& spec) {
  for (const auto& v : spec.random)
    for (const auto& f : spec.trend)
      if (!pair_orthogonal(f, v, spec.n)) return false;
  for (std::size_t i = 0; i < spec.random.size(); ++i)
    for (std::size_t j = i + 1; j < spec.random.size(); ++j)
      if (!pair_orthogonal(spec.random[i], spec.random[j], spec.n)) return false;
  return true;
}

DesignSet DesignSet::from_matrices(MatrixXd F, MatrixXd V, const DesignTolerances& tol) {
  return build(std::move(F), std::move(V), std::nullopt, tol);
}

DesignSet DesignSet::build(MatrixXd F, MatrixXd V, std::optional<bool> structural,
                           const DesignTolerances& tol) {
  if (F.rows() != V.rows() && F.cols() > 0 && V.cols() > 0)
    throw Error(ErrorCode::invalid_model, "F and V must have the same number of rows");
  const long n = std::max(F.rows(), V.rows());
  if (F.cols() == 0) F.resize(n, 0);
  if (V.cols() == 0) V.resize(n, 0);
  const long k = F.cols();
  const long l = V.cols();
  if (n <= k + l) throw Error(ErrorCode::invalid_model, "identifiability requires n > k + l");

  DesignSet d;
  d.norms_sq_ = V.colwise().squaredNorm().transpose();

  double scale = 1.0;
  if (k > 0) scale = std::max(scale, F.colwise().squaredNorm().maxCoeff());
  if (l > 0) scale = std::max(scale, d.norms_sq_.maxCoeff());
  for (long j = 0; j < l; ++j) {
    if (!(d.norms_sq_(j) > tol.degenerate_column * scale)) {
      std::ostringstream msg;
      msg << "random column " << j + 1 << " has squared norm " << d.norms_sq_(j);
      throw Error(ErrorCode::degenerate_column, msg.str());
    }
  }

  if (k + l > 0) {
    MatrixXd block(n, k + l);
    block << F, V;
    // Singular values of [F V] equal those of R from its QR factorization.
    Eigen::HouseholderQR<MatrixXd> qr(block);
    MatrixXd R = qr.matrixQR().topRows(k + l).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<MatrixXd> svd(R);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(s.size() - 1);
    if (!(smax > 0.0) || smin / smax < tol.rank_ratio) {
      std::ostringstream msg;
      msg << "rank([F V]) < k + l = " << k + l << " (sigma_min/sigma_max = "
          << (smax > 0.0 ? smin / smax : 0.0) << ")";
      throw Error(ErrorCode::rank_deficient, msg.str());
    }
  }

  d.ftf_ = F.transpose() * F;
  d.ftf_inv_ = k > 0 ? MatrixXd(d.ftf_.llt().solve(MatrixXd::Identity(k, k))) : MatrixXd(0, 0);
  d.ftv_ = F.transpose() * V;
  d.vtv_ = V.transpose() * V;
  d.F_ = std::move(F);
  d.V_ = std::move(V);

  d.orthogonal_ = structural.value_or(false) || d.orthogonality_defect() <= tol.orthogonality;
  if (d.orthogonal_) {
    d.w_ = d.norms_sq_.asDiagonal();
    d.mf_v_ = d.V_;
  } else {
    d.mf_v_ = d.apply_mf(d.V_);
    d.w_ = d.V_.transpose() * d.mf_v_;
    d.w_ = 0.5 * (d.w_ + d.w_.transpose()).eval();
  }
  return d;
}

double DesignSet::orthogonality_defect() const {
  double defect = 0.0;
  const VectorXd fnorm = F_.colwise().norm().transpose();
  const VectorXd vnorm = norms_sq_.cwiseSqrt();
  for (long j = 0; j < l(); ++j) {
    for (long i = 0; i < k(); ++i) {
      const double denom = fnorm(i) * vnorm(j);
      if (denom > 0.0) defect = std::max(defect, std::abs(ftv_(i, j)) / denom);
    }
    for (long i = 0; i < j; ++i)
      defect = std::max(defect, std::abs(vtv_(i, j)) / (vnorm(i) * vnorm(j)));
  }
  return defect;
}

VectorXd DesignSet::apply_mf(const VectorXd& y) const {
  if (k() == 0) return y;
  const VectorXd coef = ftf_inv_ * (F_.transpose() * y);
  VectorXd out = y;
  out.noalias() -= F_ * coef;
  return out;
}

MatrixXd DesignSet::apply_mf(const MatrixXd& y) const {
  if (k() == 0) return y;
  const MatrixXd coef = ftf_inv_ * (F_.transpose() * y);
  MatrixXd out = y;
  out.noalias() -= F_ * coef;
  return out;
}

MatrixXd DesignSet::projector() const {
  MatrixXd m = MatrixXd::Identity(n(), n());
  if (k() > 0) m.noalias() -= F_ * ftf_inv_ * F_.transpose();
  return m;
}

DesignSet realize(const ModelSpec& spec, const DesignTolerances& tol) {
  spec.validate();
  const long n = spec.n;
  MatrixXd F(n, spec.k());
  MatrixXd V(n, spec.l());
  for (long t = 1; t <= n; ++t) {
    for (long i = 0; i < spec.k(); ++i) F(t - 1, i) = spec.trend[static_cast<std::size_t>(i)](t);
    for (long j = 0; j < spec.l(); ++j) V(t - 1, j) = spec.random[static_cast<std::size_t>(j)](t);
  }
  return DesignSet::build(std::move(F), std::move(V), structurally_orthogonal(spec), tol);
}

}  // namespace fdslrm
