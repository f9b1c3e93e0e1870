// linalg.hpp — dense complex linear-algebra kernel: Hermitian eigendecomposition,
// operator functions, Kronecker products, partial trace. All operator functions
// go through the eigendecomposition (inputs are Hermitian by construction), and
// eigenvectors carry a canonical phase so repeated runs are bit-identical.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpump {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Fixed numerical contracts shared across the library.
namespace tol {
inline constexpr double hermiticity = 1e-10;    // relative Frobenius norm
inline constexpr double psd_reject = 1e-10;     // eigenvalues below -reject are an error; above, clipped to 0
inline constexpr double support = 1e-14;        // spectral support cutoff for logarithms
inline constexpr double conservation = 1e-9;    // relative commutator norm for [H, V]
inline constexpr double merge_default = 1e-12;  // componentwise heat-atom merge
inline constexpr double drop_default = 1e-15;   // probability below which atoms drop
}  // namespace tol

struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

struct HermiticityError : std::runtime_error {
  double violation;
  HermiticityError(const std::string& what, double violation_norm)
      : std::runtime_error(what), violation(violation_norm) {}
};

struct NotPsdError : std::runtime_error {
  double min_eigenvalue;
  NotPsdError(const std::string& what, double min_eig)
      : std::runtime_error(what), min_eigenvalue(min_eig) {}
};

// ‖m − m†‖_F
inline double hermiticity_violation(const ComplexMatrix& m) {
  return (m - m.adjoint()).norm();
}

inline bool is_hermitian(const ComplexMatrix& m, double rel_tol = tol::hermiticity) {
  return hermiticity_violation(m) <= rel_tol * std::max(1.0, m.norm());
}

// Stable ln Σ e^{x_i}
inline double log_sum_exp(const RealVector& x) {
  if (x.size() == 0) return -std::numeric_limits<double>::infinity();
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

// e^{x_i} / Σ_k e^{x_k}, computed without overflow
inline RealVector softmax(const RealVector& x) {
  const double m = x.maxCoeff();
  RealVector w = (x.array() - m).exp();
  return w / w.sum();
}

// Kronecker product with the row-major block convention:
// out(i*rb + k, j*cb + l) = a(i, j) * b(k, l)
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::Index rb = b.rows(), cb = b.cols();
  ComplexMatrix out(a.rows() * rb, a.cols() * cb);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
  return out;
}

// I_{d_0} ⊗ … ⊗ op ⊗ … ⊗ I_{d_{n-1}} with op in the given slot
inline ComplexMatrix embed_local(const ComplexMatrix& op, int slot,
                                 const std::vector<int>& dims) {
  if (slot < 0 || slot >= static_cast<int>(dims.size()))
    throw DimensionError("embed_local: slot " + std::to_string(slot) +
                         " out of range for " + std::to_string(dims.size()) +
                         " subsystems");
  if (op.rows() != op.cols() || op.rows() != dims[static_cast<size_t>(slot)])
    throw DimensionError("embed_local: operator is " + std::to_string(op.rows()) +
                         "x" + std::to_string(op.cols()) + " but slot " +
                         std::to_string(slot) + " has dimension " +
                         std::to_string(dims[static_cast<size_t>(slot)]));
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int j = 0; j < static_cast<int>(dims.size()); ++j) {
    if (j == slot)
      out = kron(out, op);
    else
      out = kron(out, ComplexMatrix::Identity(dims[static_cast<size_t>(j)],
                                              dims[static_cast<size_t>(j)]));
  }
  return out;
}

struct HermitianEigen {
  RealVector eigenvalues;      // ascending
  ComplexMatrix eigenvectors;  // unitary; column k belongs to eigenvalues[k]
};

// Hermitian eigendecomposition with a canonical phase: the largest-magnitude
// component of each eigenvector (first such index on ties) is made real
// positive. Rejects matrices violating the hermiticity tolerance.
inline HermitianEigen hermitian_eig(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionError("hermitian_eig: matrix must be square and non-empty");
  if (!m.allFinite())
    throw std::invalid_argument("hermitian_eig: matrix has non-finite entries");
  const double violation = hermiticity_violation(m);
  if (!(violation <= tol::hermiticity * std::max(1.0, m.norm()))) {
    std::ostringstream msg;
    msg << "hermitian_eig: matrix is not Hermitian (violation " << violation
        << ", tolerance " << tol::hermiticity * std::max(1.0, m.norm()) << ")";
    throw HermiticityError(msg.str(), violation);
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eig: eigendecomposition failed");
  HermitianEigen out{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index c = 0; c < out.eigenvectors.cols(); ++c) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < out.eigenvectors.rows(); ++r) {
      const double a = std::abs(out.eigenvectors(r, c));
      if (a > best) {
        best = a;
        imax = r;
      }
    }
    const Complex z = out.eigenvectors(imax, c);
    if (std::abs(z) > 0.0) out.eigenvectors.col(c) *= std::conj(z) / std::abs(z);
  }
  return out;
}

// W f(scale·Λ) W† with f applied entrywise to the scaled eigenvalues
inline ComplexMatrix func_hermitian(const ComplexMatrix& m,
                                    const std::function<Complex(Complex)>& f,
                                    Complex scale = Complex(1.0, 0.0)) {
  const HermitianEigen eig = hermitian_eig(m);
  ComplexVector fvals(eig.eigenvalues.size());
  for (Eigen::Index k = 0; k < fvals.size(); ++k)
    fvals(k) = f(scale * eig.eigenvalues(k));
  return eig.eigenvectors * fvals.asDiagonal() * eig.eigenvectors.adjoint();
}

// e^{scale·M}; the workhorse for Gibbs weights and evolution operators
inline ComplexMatrix exp_hermitian(const ComplexMatrix& m,
                                   Complex scale = Complex(1.0, 0.0)) {
  return func_hermitian(m, [](Complex z) { return std::exp(z); }, scale);
}

// Trace out every subsystem not listed in `keep`. Kept subsystems remain in
// ascending slot order; keep = all slots returns a copy, keep = {} the 1x1 trace.
inline ComplexMatrix partial_trace(const ComplexMatrix& rho,
                                   const std::vector<int>& keep,
                                   const std::vector<int>& dims) {
  const int n = static_cast<int>(dims.size());
  long total = 1;
  for (int d : dims) {
    if (d < 1) throw DimensionError("partial_trace: subsystem dimension < 1");
    total *= d;
  }
  if (rho.rows() != total || rho.cols() != total)
    throw DimensionError("partial_trace: state is " + std::to_string(rho.rows()) +
                         "x" + std::to_string(rho.cols()) + " but layout requires " +
                         std::to_string(total));

  std::vector<int> keep_sorted(keep);
  std::sort(keep_sorted.begin(), keep_sorted.end());
  keep_sorted.erase(std::unique(keep_sorted.begin(), keep_sorted.end()),
                    keep_sorted.end());
  for (int s : keep_sorted)
    if (s < 0 || s >= n)
      throw DimensionError("partial_trace: keep index " + std::to_string(s) +
                           " out of range");

  // slot strides in the row-major multi-index layout (slot 0 slowest)
  std::vector<long> stride(static_cast<size_t>(n), 1);
  for (int j = n - 2; j >= 0; --j)
    stride[static_cast<size_t>(j)] =
        stride[static_cast<size_t>(j + 1)] * dims[static_cast<size_t>(j + 1)];

  auto offsets_for = [&](const std::vector<int>& slots) {
    std::vector<long> offsets{0};
    for (int s : slots) {
      std::vector<long> next;
      next.reserve(offsets.size() * static_cast<size_t>(dims[static_cast<size_t>(s)]));
      for (long base : offsets)
        for (int k = 0; k < dims[static_cast<size_t>(s)]; ++k)
          next.push_back(base + k * stride[static_cast<size_t>(s)]);
      offsets = std::move(next);
    }
    return offsets;
  };

  std::vector<int> traced;
  for (int j = 0; j < n; ++j)
    if (!std::binary_search(keep_sorted.begin(), keep_sorted.end(), j))
      traced.push_back(j);

  const std::vector<long> keep_off = offsets_for(keep_sorted);
  const std::vector<long> trace_off = offsets_for(traced);

  const long dk = static_cast<long>(keep_off.size());
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (long a = 0; a < dk; ++a)
    for (long b = 0; b < dk; ++b) {
      Complex acc = 0.0;
      for (long t : trace_off) acc += rho(keep_off[static_cast<size_t>(a)] + t,
                                          keep_off[static_cast<size_t>(b)] + t);
      out(a, b) = acc;
    }
  return out;
}

// Matrix logarithm on the spectral support of a PSD matrix. Small negative
// eigenvalues (≥ -tol::psd_reject) are clipped to zero; eigenvalues below
// tol::support get log-value 0, which realizes the 0·ln 0 = 0 convention when
// the result is traced against a state supported on the same subspace.
inline ComplexMatrix log_psd(const ComplexMatrix& m) {
  const HermitianEigen eig = hermitian_eig(m);
  RealVector logvals(eig.eigenvalues.size());
  for (Eigen::Index k = 0; k < logvals.size(); ++k) {
    const double lambda = eig.eigenvalues(k);
    if (lambda < -tol::psd_reject) {
      std::ostringstream msg;
      msg << "log_psd: matrix is not positive semidefinite (eigenvalue "
          << lambda << ")";
      throw NotPsdError(msg.str(), lambda);
    }
    const double clipped = lambda < 0.0 ? 0.0 : lambda;
    logvals(k) = clipped < tol::support ? 0.0 : std::log(clipped);
  }
  const ComplexVector diag = logvals.cast<Complex>();
  return eig.eigenvectors * diag.asDiagonal() * eig.eigenvectors.adjoint();
}

}  // namespace qpump
