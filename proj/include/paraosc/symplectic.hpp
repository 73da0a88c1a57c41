#pragma once

// Phase-space index conventions and symplectic linear algebra shared by the
// rest of the library. Everything here is immutable after construction.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>

namespace paraosc {

using Complex = std::complex<double>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Unified phase-space ordering: slots 0..N-1 hold the positions q_i, slots
/// N..2N-1 the momenta p_i. 0-based slot k corresponds to index k+1 in the
/// usual 1-based convention.
class PhaseIndexConvention {
 public:
  explicit PhaseIndexConvention(Eigen::Index n_modes) : n_(n_modes) {
    if (n_modes < 1)
      throw std::invalid_argument("PhaseIndexConvention: n_modes must be >= 1");
  }
  Eigen::Index n_modes() const { return n_; }
  Eigen::Index dim() const { return 2 * n_; }
  Eigen::Index position_slot(Eigen::Index mode) const {
    check_mode(mode);
    return mode;
  }
  Eigen::Index momentum_slot(Eigen::Index mode) const {
    check_mode(mode);
    return n_ + mode;
  }

 private:
  void check_mode(Eigen::Index mode) const {
    if (mode < 0 || mode >= n_)
      throw std::out_of_range("PhaseIndexConvention: mode index out of range");
  }
  Eigen::Index n_;
};

/// The symplectic matrix pair in N-block form:
///   upper = [[0, 1_N], [-1_N, 0]]   (raised indices)
///   lower = [[0, -1_N], [1_N, 0]]   (lowered indices, upper * lower = 1)
struct SymplecticForm {
  Eigen::Index n_modes = 0;
  Eigen::MatrixXd upper;
  Eigen::MatrixXd lower;
};

inline SymplecticForm make_symplectic_form(Eigen::Index n_modes) {
  if (n_modes < 1)
    throw std::invalid_argument("make_symplectic_form: n_modes must be >= 1");
  const Eigen::Index n = n_modes;
  SymplecticForm form;
  form.n_modes = n;
  form.upper = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  form.upper.topRightCorner(n, n).setIdentity();
  form.upper.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  form.lower = form.upper.transpose();
  return form;
}

/// v_nu = eps_{nu rho} v^rho. Exact: the form entries are 0 and +-1.
template <typename Derived>
auto lower_index(const Eigen::MatrixBase<Derived>& v, const SymplecticForm& form) {
  using Scalar = typename Derived::Scalar;
  if (v.rows() != 2 * form.n_modes || v.cols() != 1)
    throw std::invalid_argument("lower_index: expected a 2N column vector");
  return (form.lower.template cast<Scalar>() * v.derived()).eval();
}

/// v^mu = eps^{mu nu} v_nu; exact inverse of lower_index.
template <typename Derived>
auto raise_index(const Eigen::MatrixBase<Derived>& v, const SymplecticForm& form) {
  using Scalar = typename Derived::Scalar;
  if (v.rows() != 2 * form.n_modes || v.cols() != 1)
    throw std::invalid_argument("raise_index: expected a 2N column vector");
  return (form.upper.template cast<Scalar>() * v.derived()).eval();
}

/// Max-norm defect of M eps M^T = eps; zero exactly when M is symplectic.
template <typename Derived>
double symplectic_residual(const Eigen::MatrixBase<Derived>& M, const SymplecticForm& form) {
  using Scalar = typename Derived::Scalar;
  if (M.rows() != 2 * form.n_modes || M.cols() != M.rows())
    throw std::invalid_argument("symplectic_residual: expected a 2N x 2N matrix");
  const Mat<Scalar> eps = form.upper.template cast<Scalar>();
  return (M.derived() * eps * M.derived().transpose() - eps).cwiseAbs().maxCoeff();
}

/// Commutator defect of condition (ii): || i V eps V^T - eps ||_max.
template <typename Derived>
double canonical_residual(const Eigen::MatrixBase<Derived>& V, const SymplecticForm& form) {
  if (V.rows() != 2 * form.n_modes || V.cols() != V.rows())
    throw std::invalid_argument("canonical_residual: expected a 2N x 2N matrix");
  const Mat<Complex> eps = form.upper.cast<Complex>();
  const Mat<Complex> Vc = V.derived().template cast<Complex>();
  return (Complex(0, 1) * Vc * eps * Vc.transpose() - eps).cwiseAbs().maxCoeff();
}

}  // namespace paraosc
